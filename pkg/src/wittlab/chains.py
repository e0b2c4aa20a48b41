"""Chain equivalence of orthogonal bases, constructively.

Two orthogonal bases of an inner product space are chain equivalent when a
sequence of orthogonal bases connects them in which consecutive bases share
all but at most two vectors.  This module builds such chains as verifiable
certificates: the reduction from a local ring to its residue field, the
field-level constructions (including the finite characteristic-2 case), and
a breadth-first oracle that doubles as the proof engine for the F_2
counterexample.

Chain entries are stored as ordered tuples; the overlap condition and
endpoint identity are evaluated on vector *sets*, matching the set
intersection in the definition.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field as dc_field

from .rings import LocalRing, RingElement
from .bilinear import (
    BilinearSpace,
    BilinearError,
    NotInMaximalIdealError,
    diagonalize,
    orthogonal_complement,
    vec_add,
    vec_combo,
    vec_scale,
    vec_sub,
)
from . import matrices as mx


class ChainError(Exception):
    pass


class NotOrthogonalError(ChainError):
    pass


class NotEqualModMError(ChainError):
    pass


class NotOrthogonalOverResidueError(ChainError):
    pass


class IsotropicPartialSumError(ChainError):
    def __init__(self, r):
        super().__init__(f"partial sum {r} is isotropic")
        self.r = r


class FieldTooSmallError(ChainError):
    pass


class ChainUnreachableError(ChainError):
    """The endpoints provably lie in different components (F_2 phenomena)."""


class BudgetExceededError(ChainError):
    pass


class BadParametersError(ChainError):
    pass


# ---------------------------------------------------------------------------
# bases and chains
# ---------------------------------------------------------------------------


class OrthogonalBasis:
    """Ordered tuple of pairwise orthogonal anisotropic vectors forming a basis."""

    def __init__(self, space: BilinearSpace, vectors, validate: bool = True):
        self.space = space
        self.vectors = tuple(tuple(v) for v in vectors)
        if validate:
            ok, msg = _check_orthobasis(space, self.vectors)
            if not ok:
                raise NotOrthogonalError(msg)

    def vector_set(self):
        return frozenset(self.vectors)

    def q_values(self):
        return tuple(self.space.eval_q(v) for v in self.vectors)

    def reduce(self) -> "OrthogonalBasis":
        rspace = self.space.reduce()
        return OrthogonalBasis(
            rspace, tuple(self.space.reduce_vector(v) for v in self.vectors)
        )

    def to_json(self):
        return [[c.to_json() for c in v] for v in self.vectors]

    def __eq__(self, other):
        return (
            isinstance(other, OrthogonalBasis)
            and self.space == other.space
            and self.vectors == other.vectors
        )

    def __repr__(self):
        return f"OrthogonalBasis({list(self.vectors)!r})"


def _check_orthobasis(space, vectors):
    n = space.n
    if len(vectors) != n:
        return False, f"expected {n} vectors, got {len(vectors)}"
    for v in vectors:
        if len(v) != n:
            return False, "vector length does not match the space dimension"
    for i in range(n):
        if not space.eval_q(vectors[i]).is_unit():
            return False, f"vector {i} is not anisotropic"
        for j in range(i + 1, n):
            if not space.eval_b(vectors[i], vectors[j]).is_zero():
                return False, f"vectors {i} and {j} are not orthogonal"
    if n:
        M = mx.mat_transpose(vectors)
        if not mx.mat_det(space.ring, M).is_unit():
            return False, "vectors do not form a basis (determinant not a unit)"
    return True, "ok"


class Chain:
    """A nonempty sequence of orthogonal bases with >= n-2 set overlap."""

    def __init__(self, space: BilinearSpace, bases):
        self.space = space
        self.bases = tuple(bases)
        if not self.bases:
            raise ChainError("a chain must contain at least one basis")

    def __len__(self):
        return len(self.bases)

    def verify(self, start: OrthogonalBasis, end: OrthogonalBasis):
        ok, msg = verify_chain(self, start, end)
        if not ok:
            raise ChainError(msg)
        return self

    def to_json(self):
        return {
            "ring": self.space.ring.spec,
            "gram": self.space.to_json(),
            "bases": [b.to_json() for b in self.bases],
        }

    @classmethod
    def from_json(cls, obj, ring: LocalRing | None = None,
                  size_cap: int | None = None) -> "Chain":
        from .rings import parse_ring, DEFAULT_SIZE_CAP

        if ring is None:
            cap = size_cap if size_cap is not None else DEFAULT_SIZE_CAP
            ring = parse_ring(obj["ring"], cap)
        space = BilinearSpace.from_json(ring, obj["gram"])
        bases = [
            OrthogonalBasis(
                space,
                tuple(tuple(ring.element_from_json(c) for c in v) for v in bvecs),
            )
            for bvecs in obj["bases"]
        ]
        return cls(space, bases)


def verify_chain(chain: Chain, start: OrthogonalBasis, end: OrthogonalBasis):
    """Full certificate check; returns (ok, diagnostic)."""
    n = chain.space.n
    for idx, basis in enumerate(chain.bases):
        if basis.space != chain.space:
            return False, f"basis {idx} lives on a different space"
        ok, msg = _check_orthobasis(chain.space, basis.vectors)
        if not ok:
            return False, f"basis {idx}: {msg}"
    for idx in range(len(chain.bases) - 1):
        overlap = chain.bases[idx].vector_set() & chain.bases[idx + 1].vector_set()
        if len(overlap) < n - 2:
            return False, (
                f"step {idx} -> {idx + 1} replaces more than two vectors "
                f"(overlap {len(overlap)} < {n - 2})"
            )
    if chain.bases[0].vector_set() != start.vector_set():
        return False, "chain does not start at the requested basis"
    if chain.bases[-1].vector_set() != end.vector_set():
        return False, "chain does not end at the requested basis"
    return True, "ok"


def standard_basis(space: BilinearSpace) -> OrthogonalBasis:
    """The standard basis, valid only when the Gram matrix is diagonal."""
    return OrthogonalBasis(space, space.standard_basis())


# ---------------------------------------------------------------------------
# local-ring steps
# ---------------------------------------------------------------------------


def elementary_move(basis: OrthogonalBasis, eps: RingElement, i: int, j: int) -> OrthogonalBasis:
    """Replace positions i, j by (u_i + eps u_j, u_j - eps q(u_j)/q(u_i) u_i).

    eps must lie in the maximal ideal; the result is orthogonal and equals
    the input componentwise modulo the maximal ideal.
    """
    space = basis.space
    if eps.is_unit():
        raise NotInMaximalIdealError("eps must lie in the maximal ideal")
    if i == j:
        raise ChainError("positions must differ")
    u = list(basis.vectors)
    qi = space.eval_q(u[i])
    qj = space.eval_q(u[j])
    new_i = vec_add(u[i], vec_scale(eps, u[j]))
    new_j = vec_sub(u[j], vec_scale(eps * qj * qi.inv(), u[i]))
    u[i], u[j] = new_i, new_j
    return OrthogonalBasis(space, u)


def _coords_in(space, basis_vectors, z):
    """Coordinates of z in an orthogonal tuple: c_i = b(z, u_i) / q(u_i)."""
    return tuple(
        space.eval_b(z, u) * space.eval_q(u).inv() for u in basis_vectors
    )


def chain_equal_mod_m(b1: OrthogonalBasis, b2: OrthogonalBasis) -> Chain:
    """Chain between orthogonal bases that agree componentwise mod m."""
    space = b1.space
    if b2.space != space:
        raise ChainError("bases live on different spaces")
    red1 = [space.reduce_vector(v) for v in b1.vectors]
    red2 = [space.reduce_vector(v) for v in b2.vectors]
    if red1 != red2:
        raise NotEqualModMError("bases differ modulo the maximal ideal")
    steps = _equal_mod_m_core(space, b1.vectors, b2.vectors)
    chain = Chain(space, [OrthogonalBasis(space, t) for t in _dedupe(steps)])
    return chain.verify(b1, b2)


def _equal_mod_m_core(space, cur, target):
    k = len(cur)
    if cur == target:
        return [cur]
    if k <= 2:
        return [cur, target]
    coords = _coords_in(space, cur, target[0])
    eps1 = coords[0] - space.ring.one
    steps = [cur]
    work = list(cur)
    if not eps1.is_zero():
        work[0] = vec_scale(space.ring.one + eps1, work[0])
        steps.append(tuple(work))
    for i in range(1, k):
        eps = coords[i]
        if eps.is_zero():
            continue
        if eps.is_unit():
            raise NotEqualModMError("coordinate outside the maximal ideal")
        q0 = space.eval_q(work[0])
        qi = space.eval_q(work[i])
        new0 = vec_add(work[0], vec_scale(eps, work[i]))
        newi = vec_sub(work[i], vec_scale(eps * qi * q0.inv(), work[0]))
        work[0], work[i] = new0, newi
        steps.append(tuple(work))
    if work[0] != target[0]:
        raise ChainError("partial-sum recursion failed to reach the target vector")
    sub = _equal_mod_m_core(space, tuple(work[1:]), tuple(target[1:]))
    for t in sub[1:]:
        steps.append((work[0],) + t)
    return steps


def _dedupe(steps):
    out = [steps[0]]
    for t in steps[1:]:
        if frozenset(t) != frozenset(out[-1]):
            out.append(t)
    return out


# ---------------------------------------------------------------------------
# lifting residue bases
# ---------------------------------------------------------------------------


def lift_basis(space: BilinearSpace, residue_vectors) -> OrthogonalBasis:
    """Lift an orthogonal basis of the reduced space to one over the ring."""
    rspace = space.reduce()
    residue_vectors = tuple(tuple(v) for v in residue_vectors)
    ok, msg = _check_orthobasis(rspace, residue_vectors)
    if not ok:
        raise NotOrthogonalOverResidueError(msg)
    lifts: list = []
    for vbar in residue_vectors:
        lifts.append(_lift_one(space, lifts, vbar))
    basis = OrthogonalBasis(space, lifts)
    if basis.reduce().vectors != residue_vectors:
        raise ChainError("lift does not reduce to its input")
    return basis


def _lift_one(space, chosen, vbar):
    """Lift vbar into the orthogonal complement of the chosen lifts."""
    ring = space.ring
    F = ring.residue_field()
    if not chosen:
        return tuple(ring.lift(c) for c in vbar)
    comp = orthogonal_complement(space, chosen)
    comp_red = tuple(space.reduce_vector(w) for w in comp)
    # solve vbar = sum c_j * comp_red_j over the residue field
    A = mx.mat_transpose(comp_red)
    sol = mx.solve_field(F, A, vbar)
    if sol is None:
        raise NotOrthogonalOverResidueError(
            "residue vector is not orthogonal to the previous ones"
        )
    coeffs = tuple(ring.lift(c) for c in sol)
    return vec_combo(comp, coeffs)


def lift_pair(space: BilinearSpace, bbar, cbar):
    """Lift two residue bases differing in <= 2 places to lifts sharing all
    other positions exactly."""
    bbar = tuple(tuple(v) for v in bbar)
    cbar = tuple(tuple(v) for v in cbar)
    if len(bbar) != len(cbar):
        raise ChainError("residue bases must have equal length")
    diff = [i for i in range(len(bbar)) if bbar[i] != cbar[i]]
    if len(diff) > 2:
        raise ChainError("residue bases differ in more than two places")
    B = lift_basis(space, bbar)
    if not diff:
        return B, B
    kept = [B.vectors[i] for i in range(len(bbar)) if i not in diff]
    new: list = []
    for d in diff:
        new.append(_lift_one(space, kept + new, cbar[d]))
    cvecs = list(B.vectors)
    for pos, vec in zip(diff, new):
        cvecs[pos] = vec
    C = OrthogonalBasis(space, cvecs)
    if C.reduce().vectors != cbar:
        raise ChainError("pair lift does not reduce to its input")
    return B, C


# ---------------------------------------------------------------------------
# field-level chains
# ---------------------------------------------------------------------------


def _field_sqrt(field: LocalRing, c: RingElement) -> RingElement:
    """Square root in a finite field of characteristic 2 (Frobenius inverse)."""
    return c ** (field.size // 2)


def _complement_in_plane(space, z, p, q):
    """Generator of the orthogonal of z inside the nondegenerate plane
    spanned by p and q (z anisotropic in that plane)."""
    g = vec_sub(vec_scale(space.eval_b(q, z), p), vec_scale(space.eval_b(p, z), q))
    return g


def _extend_core(space, basis_vectors, coeffs):
    """Chain realizing lem. "element chains": returns (steps, final_tuple).

    basis_vectors is a tuple of mutually orthogonal anisotropic vectors;
    coeffs are ring elements.  Every nonzero partial sum past the first
    nonzero coefficient must be anisotropic (IsotropicPartialSumError
    reports the 1-based failing index).
    """
    k = len(basis_vectors)
    steps = [tuple(basis_vectors)]
    work = list(basis_vectors)
    partial = None          # current partial sum vector, sits at position `pos`
    pos = None
    placed = False          # whether `partial` has been written into `work`
    for r in range(k):
        c = coeffs[r]
        if c.is_zero():
            continue
        if partial is None:
            partial = vec_scale(c, work[r])
            if not space.eval_q(partial).is_unit():
                raise IsotropicPartialSumError(r + 1)
            pos = r
            placed = work[r] == partial
            continue
        z = vec_add(partial, vec_scale(c, work[r]))
        if not space.eval_q(z).is_unit():
            raise IsotropicPartialSumError(r + 1)
        # the plane span(work[pos], work[r]) contains both partial and z,
        # so the first move folds the head scaling into one step
        s = _complement_in_plane(space, z, work[pos], work[r])
        if not space.eval_q(s).is_unit():  # pragma: no cover - plane nondegenerate
            raise ChainError("complement generator degenerated")
        work[pos] = z
        work[r] = s
        partial = z
        placed = True
        steps.append(tuple(work))
    if partial is None:
        raise ChainError("all coefficients vanish")
    if not placed:
        work[pos] = partial
        steps.append(tuple(work))
    # move the constructed vector to the front (pure reordering, no step)
    final = list(steps[-1])
    final.insert(0, final.pop(pos))
    return steps, tuple(final)


def extend_vector_chain(basis: OrthogonalBasis, coeffs):
    """Extend v_1 = sum a_i u_i to an orthogonal basis chain equivalent to u."""
    space = basis.space
    coeffs = tuple(coeffs)
    if len(coeffs) != len(basis.vectors):
        raise ChainError("coefficient count must match the dimension")
    steps, final = _extend_core(space, basis.vectors, coeffs)
    target = OrthogonalBasis(space, final)
    chain = Chain(space, [OrthogonalBasis(space, t) for t in _dedupe(steps)])
    chain.verify(basis, target)
    return chain, target


def find_nonvanishing_vector(field: LocalRing, forms):
    """Vector on which every given diagonal quadratic form is nonzero.

    forms: list of coefficient tuples (alpha_1..alpha_n), each the diagonal
    of a nontrivial quadratic form sum alpha_i x_i^2 over a finite field of
    characteristic 2.
    """
    forms = [tuple(f) for f in forms]
    if not forms:
        raise BadParametersError("at least one form is required")
    n = len(forms[0])
    if any(len(f) != n for f in forms):
        raise BadParametersError("forms must share one dimension")
    if field.size % 2:
        raise BadParametersError("the construction needs characteristic 2")
    if field.size < len(forms):
        raise FieldTooSmallError(
            f"|F| = {field.size} < {len(forms)} forms"
        )
    if any(all(c.is_zero() for c in f) for f in forms):
        raise BadParametersError("forms must be nontrivial")

    def evaluate(f, v):
        acc = field.zero
        for c, x in zip(f, v):
            acc = acc + c * x * x
        return acc

    return _find_nonvanishing_core(
        field, n, [lambda v, f=f: evaluate(f, v) for f in forms]
    )


def _find_nonvanishing_core(field, n, form_fns):
    """Recursion from the epsilon-selection proof; forms are callables that
    are additive under + (diagonalisable in characteristic 2)."""
    elems = tuple(field.elements())

    def some_nonzero(fn):
        for v in itertools.product(elems, repeat=n):
            if not fn(v).is_zero():
                return v
        raise BadParametersError("form is trivial")

    r = len(form_fns)
    if r == 1:
        return some_nonzero(form_fns[0])
    v1 = _find_nonvanishing_core(field, n, form_fns[:-1])
    last = form_fns[-1]
    if not last(v1).is_zero():
        return v1
    v2 = some_nonzero(last)
    forbidden = set()
    for fn in form_fns[:-1]:
        forbidden.add((fn(v2) * fn(v1).inv()).data)
    eps = None
    for e in elems:
        if (e * e).data not in forbidden:
            eps = e
            break
    if eps is None:  # pragma: no cover - |F| >= r guarantees existence
        raise FieldTooSmallError("no epsilon available")
    return vec_add(vec_scale(eps, v1), v2)


def _rescale_steps(space, vectors):
    """Chain steps rescaling every vector to q = 1 (char-2 fields only).

    Scalings are paired two per step so each step stays within the
    two-replacement budget.
    """
    field = space.ring
    work = list(vectors)
    scale_at = []
    for i, v in enumerate(work):
        qv = space.eval_q(v)
        if qv == field.one:
            continue
        lam = _field_sqrt(field, qv).inv()
        scale_at.append((i, lam))
    steps = []
    for chunk_start in range(0, len(scale_at), 2):
        for i, lam in scale_at[chunk_start:chunk_start + 2]:
            work[i] = vec_scale(lam, work[i])
        steps.append(tuple(work))
    return steps, tuple(work)


def _hat_core(space, sub):
    """Chain from (p_1..p_m) to (p-hat_1..p-hat_m) inside their span.

    Requires m even >= 4, all q(p_i) = 1, characteristic 2, |F| > 2.
    Returns (steps, hat_tuple).
    """
    field = space.ring
    m = len(sub)
    one = field.one
    b1 = bn = None
    for cand1 in field.units():
        for cand2 in field.units():
            if not (cand1 + cand2).is_zero():
                b1, bn = cand1, cand2
                break
        if b1 is not None:
            break
    if b1 is None:  # pragma: no cover - any field with >2 elements works
        raise BadParametersError("cannot choose b_1, b_n")

    hat = []
    for k in range(m):
        acc = space.zero_vector()
        for i in range(m):
            if i != k:
                acc = vec_add(acc, sub[i])
        hat.append(acc)
    hat = tuple(hat)

    # e-side: v_1 = b_n p_1 + (b_1+b_n)(p_2+..+p_{m-1}) + b_1 p_m
    bmid = b1 + bn
    coeffs_e = (bn,) + (bmid,) * (m - 2) + (b1,)
    steps_u, ut = _extend_core(space, sub, coeffs_e)
    # hat-side: v_1 = b_1 hat_1 + b_n hat_m
    coeffs_h = (b1,) + (field.zero,) * (m - 2) + (bn,)
    steps_v, vt = _extend_core(space, hat, coeffs_h)
    if ut[0] != vt[0]:  # pragma: no cover - identity checked in tests
        raise ChainError("hat construction misaligned")
    middle = _field_chain_core(space, ut[1:], vt[1:])
    steps = list(steps_u)
    for t in middle[1:]:
        steps.append((ut[0],) + t)
    for t in reversed(steps_v[:-1]):
        steps.append(t)
    return steps, hat


def hat_chain(n: int, field: LocalRing) -> Chain:
    """Chain on <1>^n from the standard basis e to the hat basis
    (hat_e_r = sum of all e_i, i != r); n even >= 4, char 2, F != F_2."""
    if n < 4 or n % 2:
        raise BadParametersError("n must be even and at least 4")
    if field.size % 2 or field.size == 2 or not field.is_field:
        raise BadParametersError("field must have characteristic 2 and more than 2 elements")
    space = BilinearSpace.diagonal(field, (field.one,) * n)
    e = space.standard_basis()
    steps, hat = _hat_core(space, e)
    chain = Chain(space, [OrthogonalBasis(space, t) for t in _dedupe([e] + steps)])
    return chain.verify(OrthogonalBasis(space, e), OrthogonalBasis(space, hat))


def _support(coords):
    return [i for i, c in enumerate(coords) if not c.is_zero()]


def _field_chain_core(space, tup_a, tup_b):
    """Steps connecting two orthogonal tuples spanning the same subspace of
    a space over a finite field.  Dispatches on dimension and characteristic."""
    if frozenset(tup_a) == frozenset(tup_b):
        return [tup_a]
    k = len(tup_a)
    if k <= 2:
        return [tup_a, tup_b]
    field = space.ring
    if field.size == 2:
        raise ChainUnreachableError("no constructive chain over F_2; use the BFS oracle")
    if field.size % 2:
        return _field_chain_odd(space, tup_a, tup_b)
    if k == 3:
        return _field_chain_dim3_char2(space, tup_a, tup_b)
    return _field_chain_char2(space, tup_a, tup_b)


def _front_and_recurse(space, steps, cur, tup_b):
    """cur contains tup_b[0] at position `pos`; recurse on the complement."""
    pos = cur.index(tup_b[0])
    arranged = (cur[pos],) + cur[:pos] + cur[pos + 1:]
    sub = _field_chain_core(space, arranged[1:], tup_b[1:])
    for t in sub[1:]:
        steps.append((tup_b[0],) + t)
    return steps


def _field_chain_odd(space, tup_a, tup_b):
    """Minimal-support contraction; in odd characteristic a contractible
    pair always exists once the support has size >= 3."""
    steps = [tup_a]
    cur = tup_a
    w1 = tup_b[0]
    while True:
        coords = _coords_in(space, cur, w1)
        supp = _support(coords)
        r = len(supp)
        if r == 1:
            i = supp[0]
            if cur[i] != w1:
                work = list(cur)
                work[i] = w1
                cur = tuple(work)
                steps.append(cur)
            return _front_and_recurse(space, steps, cur, tup_b)
        if r == 2:
            i, j = supp
            s = _complement_in_plane(space, w1, cur[i], cur[j])
            work = list(cur)
            work[i], work[j] = w1, s
            cur = tuple(work)
            steps.append(cur)
            return _front_and_recurse(space, steps, cur, tup_b)
        pair = None
        for i, j in itertools.combinations(supp, 2):
            z = vec_add(vec_scale(coords[i], cur[i]), vec_scale(coords[j], cur[j]))
            if space.eval_q(z).is_unit():
                pair = (i, j, z)
                break
        if pair is None:  # pragma: no cover - impossible in odd characteristic
            raise ChainError("no contractible pair in odd characteristic")
        i, j, z = pair
        s = _complement_in_plane(space, z, cur[i], cur[j])
        work = list(cur)
        work[i], work[j] = z, s
        cur = tuple(work)
        steps.append(cur)


def _field_chain_dim3_char2(space, tup_a, tup_b):
    """Dimension 3 over a characteristic-2 field: pick a common head vector
    avoiding the vanishing loci of both partial-sum families."""
    field = space.ring

    def partial_forms(tup):
        fns = []
        for r in (2, 3):
            def fn(z, tup=tup, r=r):
                coords = _coords_in(space, tup, z)
                acc = field.zero
                for i in range(r):
                    acc = acc + coords[i] * coords[i] * space.eval_q(tup[i])
                return acc
            fns.append(fn)
        return fns

    fns = partial_forms(tup_a) + partial_forms(tup_b)
    if field.size < len(fns):
        raise FieldTooSmallError("field too small for the dimension-3 construction")
    z = _find_nonvanishing_core(field, space.n, fns)
    # z is expressed in ambient coordinates already
    ca = _coords_in(space, tup_a, z)
    cb = _coords_in(space, tup_b, z)
    steps_a, ta = _extend_core(space, tup_a, ca)
    steps_b, tb = _extend_core(space, tup_b, cb)
    if ta[0] != tb[0]:  # pragma: no cover
        raise ChainError("dimension-3 heads disagree")
    steps = list(steps_a)
    # reorder ta, tb head-first is already done by _extend_core
    if frozenset(ta) != frozenset(tb):
        steps.append(tb)
    for t in reversed(steps_b[:-1]):
        steps.append(t)
    return _front_and_recurse_noop(steps, tup_b)


def _front_and_recurse_noop(steps, tup_b):
    # endpoints compare as sets; nothing further to do
    return steps


def _field_chain_char2(space, tup_a, tup_b):
    """Finite characteristic-2 fields, dimension >= 4: rescale to q = 1 and
    run the minimal-support loop with the hat-basis escape hatch."""
    steps = [tup_a]
    resc_a, cur = _rescale_steps(space, tup_a)
    steps.extend(resc_a)
    resc_b, target = _rescale_steps(space, tup_b)
    w1 = target[0]
    while True:
        coords = _coords_in(space, cur, w1)
        supp = _support(coords)
        r = len(supp)
        if r == 1:
            i = supp[0]
            if cur[i] != w1:  # pragma: no cover - q=1 forces equality
                work = list(cur)
                work[i] = w1
                cur = tuple(work)
                steps.append(cur)
            break
        if r == 2:
            i, j = supp
            s = _complement_in_plane(space, w1, cur[i], cur[j])
            s = _normalize_q1(space, s)
            work = list(cur)
            work[i], work[j] = w1, s
            cur = tuple(work)
            steps.append(cur)
            break
        pair = None
        for i, j in itertools.combinations(supp, 2):
            if coords[i] != coords[j]:
                pair = (i, j)
                break
        if pair is not None:
            i, j = pair
            z = vec_add(vec_scale(coords[i], cur[i]), vec_scale(coords[j], cur[j]))
            z = _normalize_q1(space, z)
            s = _complement_in_plane(space, z, cur[i], cur[j])
            s = _normalize_q1(space, s)
            work = list(cur)
            work[i], work[j] = z, s
            cur = tuple(work)
            steps.append(cur)
            continue
        # all support coefficients equal; r is odd and w1 = sum of support vectors
        if r == len(cur):  # pragma: no cover - contradicts orthogonality of tup_b
            raise ChainError("full-support hat case cannot occur")
        sub_idx = supp + [next(i for i in range(len(cur)) if i not in supp)]
        sub = tuple(cur[i] for i in sub_idx)
        rest_idx = [i for i in range(len(cur)) if i not in sub_idx]
        rest = tuple(cur[i] for i in rest_idx)
        hat_steps, hat = _hat_core(space, sub)
        for t in hat_steps[1:]:
            steps.append(t + rest)
        cur = hat + rest
        # w1 = hat vector omitting the appended index, i.e. hat[-1]
        if cur[len(sub) - 1] != w1:  # pragma: no cover
            raise ChainError("hat escape did not produce the target vector")
    # cur contains w1; recurse on its complement
    steps = _front_and_recurse(space, steps, cur, target)
    for t in reversed(resc_b):
        steps.append(t)
    if frozenset(steps[-1]) != frozenset(tup_b):
        steps.append(tup_b)
    return steps


def _normalize_q1(space, v):
    lam = _field_sqrt(space.ring, space.eval_q(v)).inv()
    return vec_scale(lam, v)


def chain_field(b: OrthogonalBasis, c: OrthogonalBasis,
                bfs_budget: int | None = None) -> Chain:
    """Chain between orthogonal bases over a finite field.

    F_2 is handled by the BFS oracle alone and raises ChainUnreachableError
    for the genuinely disconnected cases.
    """
    space = b.space
    field = space.ring
    if not field.is_field:
        raise ChainError("chain_field requires a field")
    if c.space != space:
        raise ChainError("bases live on different spaces")
    if b.vector_set() == c.vector_set():
        return Chain(space, [b]).verify(b, c)
    if space.n <= 2:
        return Chain(space, [b, c]).verify(b, c)
    if field.size == 2:
        result = bfs_chain_oracle(b, c, node_budget=bfs_budget)
        if result.status == "found":
            return result.chain
        if result.status == "unreachable":
            raise ChainUnreachableError(
                "endpoints lie in different chain components over F_2"
            )
        raise BudgetExceededError("BFS budget exhausted over F_2")
    steps = _field_chain_core(space, b.vectors, c.vectors)
    chain = Chain(space, [OrthogonalBasis(space, t) for t in _dedupe(steps)])
    return chain.verify(b, c)


# ---------------------------------------------------------------------------
# top-level: local ring -> residue field -> lift
# ---------------------------------------------------------------------------


def _align_step(prev_tuple, next_set):
    """Order next_set so it differs from prev_tuple in <= 2 positions."""
    prev_set = frozenset(prev_tuple)
    shared = prev_set & next_set
    incoming = sorted(next_set - prev_set, key=lambda v: tuple(c.sort_key() for c in v))
    out = []
    inc = iter(incoming)
    for v in prev_tuple:
        if v in shared:
            out.append(v)
        else:
            out.append(next(inc))
    return tuple(out)


def chain_local(b: OrthogonalBasis, c: OrthogonalBasis,
                bfs_budget: int | None = None) -> Chain:
    """Chain between two orthogonal bases over a finite local ring.

    Residue field != F_2: compute the residue-field chain, lift it stepwise,
    and splice with equal-mod-m chains.  Residue field F_2: fall back to the
    BFS oracle (the chain lemma genuinely fails there).
    """
    space = b.space
    ring = space.ring
    if c.space != space:
        raise ChainError("bases live on different spaces")
    if b.vector_set() == c.vector_set():
        return Chain(space, [b]).verify(b, c)
    if ring.is_field:
        return chain_field(b, c, bfs_budget=bfs_budget)
    F = ring.residue_field()
    if F.size == 2:
        result = bfs_chain_oracle(b, c, node_budget=bfs_budget)
        if result.status == "found":
            return result.chain
        if result.status == "unreachable":
            raise ChainUnreachableError(
                "endpoints lie in different chain components (residue field F_2)"
            )
        raise BudgetExceededError(
            "residue field is F_2 and the BFS oracle exhausted its budget"
        )

    bbar = b.reduce()
    cbar = c.reduce()
    fchain = chain_field(bbar, cbar)
    # align: make consecutive residue bases differ positionally in <= 2 slots
    tups = [bbar.vectors]
    for basis in fchain.bases[1:]:
        tups.append(_align_step(tups[-1], basis.vector_set()))
    # ensure the final aligned tuple is cbar itself, positionally
    if frozenset(tups[-1]) != cbar.vector_set():  # pragma: no cover
        raise ChainError("field chain endpoint mismatch")

    pieces = [b]
    cur = b
    for i in range(len(tups) - 1):
        Bi, Ci1 = lift_pair(space, tups[i], tups[i + 1])
        mid = chain_equal_mod_m(cur, Bi)
        pieces.extend(mid.bases[1:])
        pieces.append(Ci1)
        cur = Ci1
    # permute cur so its reduction matches c's positionally, then close up
    red_positions = {}
    for idx, v in enumerate(cur.vectors):
        red_positions[space.reduce_vector(v)] = idx
    arranged = tuple(
        cur.vectors[red_positions[space.reduce_vector(v)]] for v in c.vectors
    )
    cur2 = OrthogonalBasis(space, arranged)
    tail = chain_equal_mod_m(cur2, c)
    pieces.extend(tail.bases[1:] if tail.bases[0].vector_set() == pieces[-1].vector_set() else tail.bases)
    chain = Chain(space, _dedupe_bases(pieces))
    return chain.verify(b, c)


def _dedupe_bases(bases):
    out = [bases[0]]
    for basis in bases[1:]:
        if basis.vector_set() != out[-1].vector_set():
            out.append(basis)
    return out


# ---------------------------------------------------------------------------
# BFS oracle
# ---------------------------------------------------------------------------


DEFAULT_BFS_NODE_BUDGET = 200_000
DEFAULT_BFS_SPACE_CAP = 1 << 16


@dataclass
class BfsResult:
    status: str                     # "found" | "unreachable" | "budget"
    chain: Chain | None = None
    explored: int = 0
    component: tuple = dc_field(default_factory=tuple)


def bfs_chain_oracle(b: OrthogonalBasis, c: OrthogonalBasis,
                     node_budget: int | None = None,
                     space_cap: int = DEFAULT_BFS_SPACE_CAP) -> BfsResult:
    """Breadth-first search on the graph of orthogonal basis sets.

    Edges replace at most two vectors.  "unreachable" is only reported after
    the full component of the start basis has been explored.
    """
    space = b.space
    ring = space.ring
    if node_budget is None:
        node_budget = DEFAULT_BFS_NODE_BUDGET
    if ring.size ** space.n > space_cap:
        raise BudgetExceededError(
            f"|R|^n = {ring.size ** space.n} exceeds the BFS space cap {space_cap}"
        )
    start = b.vector_set()
    goal = c.vector_set()
    parents: dict = {start: None}
    queue = deque([start])
    explored = 0
    found = start == goal
    while queue and not found:
        node = queue.popleft()
        explored += 1
        if explored > node_budget:
            return BfsResult("budget", explored=explored)
        for nxt in _bfs_neighbors(space, node):
            if nxt in parents:
                continue
            parents[nxt] = node
            if nxt == goal:
                found = True
                break
            queue.append(nxt)
    if not found:
        return BfsResult(
            "unreachable",
            explored=explored,
            component=tuple(sorted(parents, key=_node_key)),
        )
    path = []
    node = goal
    while node is not None:
        path.append(node)
        node = parents[node]
    path.reverse()
    tuples = [_canonical_tuple(path[0])]
    for nod in path[1:]:
        tuples.append(_align_step(tuples[-1], nod))
    chain = Chain(space, [OrthogonalBasis(space, t) for t in tuples])
    chain.verify(b, c)
    return BfsResult("found", chain=chain, explored=explored, component=())


def _node_key(node):
    return tuple(sorted(tuple(c.sort_key() for c in v) for v in node))


def _canonical_tuple(node):
    return tuple(sorted(node, key=lambda v: tuple(c.sort_key() for c in v)))


def _bfs_neighbors(space, node):
    ring = space.ring
    vectors = _canonical_tuple(node)
    n = len(vectors)
    units = ring.units()
    out = []
    # replace one vector
    for i in range(n):
        kept = vectors[:i] + vectors[i + 1:]
        comp = orthogonal_complement(space, kept)
        g = comp[0]
        if not space.eval_q(g).is_unit():
            continue
        for u in units:
            z = vec_scale(u, g)
            nxt = frozenset(kept) | {z}
            if nxt != node:
                out.append(nxt)
    # replace two vectors
    elems = tuple(ring.elements())
    for i, j in itertools.combinations(range(n), 2):
        kept = tuple(v for k, v in enumerate(vectors) if k not in (i, j))
        if kept:
            comp = orthogonal_complement(space, kept)
        else:
            comp = space.standard_basis()
        g1, g2 = comp[0], comp[1]
        seen_z1 = set()
        for c1 in elems:
            for c2 in elems:
                z1 = vec_add(vec_scale(c1, g1), vec_scale(c2, g2))
                if z1 in seen_z1:
                    continue
                seen_z1.add(z1)
                if not space.eval_q(z1).is_unit():
                    continue
                gp = _complement_in_plane(space, z1, g1, g2)
                if not space.eval_q(gp).is_unit():
                    continue
                for u in units:
                    z2 = vec_scale(u, gp)
                    if z2 == z1:
                        continue
                    nxt = frozenset(kept) | {z1, z2}
                    if len(nxt) == n and nxt != node:
                        out.append(nxt)
    # deterministic expansion order
    out_sorted = sorted(set(out), key=_node_key)
    return out_sorted


def all_orthogonal_bases(space: BilinearSpace):
    """Every orthogonal basis vector-set of a small space (backtracking)."""
    ring = space.ring
    aniso = [v for v in space.all_vectors() if space.eval_q(v).is_unit()]
    results: list = []

    def extend(chosen, start_pool):
        if len(chosen) == space.n:
            M = mx.mat_transpose(tuple(chosen))
            if mx.mat_det(ring, M).is_unit():
                results.append(frozenset(chosen))
            return
        for idx, v in enumerate(start_pool):
            if all(space.eval_b(v, w).is_zero() for w in chosen):
                extend(chosen + [v], start_pool[idx + 1:])

    extend([], aniso)
    return sorted(results, key=_node_key)


# ---------------------------------------------------------------------------
# randomized generation helpers (used by the test suites)
# ---------------------------------------------------------------------------


def random_orthogonal_basis(space: BilinearSpace, rng, attempts: int = 2000) -> OrthogonalBasis:
    """A random orthogonal basis of a space that admits one.

    Backtracking rejection sampling: pick random anisotropic vectors whose
    orthogonal complement still diagonalizes with unit values throughout.
    """
    ring = space.ring

    def pick(basis_vectors, depth):
        if not basis_vectors:
            return []
        k = len(basis_vectors)
        for _ in range(attempts):
            coeffs = tuple(ring.random_element(rng) for _ in range(k))
            v = vec_combo(basis_vectors, coeffs)
            if not space.eval_q(v).is_unit():
                continue
            rest = _complement_within(space, tuple(basis_vectors), (v,))
            gram = tuple(tuple(space.eval_b(p, q2) for q2 in rest) for p in rest)
            try:
                sub = BilinearSpace(ring, gram)
            except BilinearError:  # pragma: no cover - complement is nondegenerate
                continue
            rep, _ = diagonalize(sub)
            if rep.r:
                continue
            tail = pick(list(rest), depth + 1)
            if tail is not None:
                return [v] + tail
        return None

    vecs = pick(list(space.standard_basis()), 0)
    if vecs is None:
        raise ChainError("could not sample an orthogonal basis")
    return OrthogonalBasis(space, vecs)


def _complement_within(space, basis, chosen):
    rows = tuple(tuple(space.eval_b(ch, v) for v in basis) for ch in chosen)
    _, kernel = mx.kernel_basis(space.ring, rows)
    return tuple(vec_combo(basis, coeffs) for coeffs in kernel)


def random_diagonal_space(ring: LocalRing, n: int, rng) -> BilinearSpace:
    return BilinearSpace.diagonal(ring, tuple(ring.random_unit(rng) for _ in range(n)))
