"""Inner product spaces as Gram matrices over a finite local ring.

A space is a symmetric matrix with unit determinant.  Every structural
statement made by this module is certified: congruences carry an explicit
witness matrix M with M^T A M = B, verified by exact recomputation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .rings import LocalRing, NonUnitError, RingElement
from . import matrices as mx


class BilinearError(Exception):
    pass


class DimensionMismatchError(BilinearError):
    pass


class DegenerateError(BilinearError):
    """Gram determinant is not a unit."""


class DegenerateSubspaceError(BilinearError):
    """The restriction of the form to the given vectors is degenerate."""


class NotInMaximalIdealError(BilinearError):
    pass


_ALL_VECTORS: dict = {}


class BilinearSpace:
    """(R^n, b) with b(x, y) = x^T A y for a symmetric unit-determinant A."""

    def __init__(self, ring: LocalRing, gram):
        self.ring = ring
        self.gram = tuple(tuple(row) for row in gram)
        self.n = len(self.gram)
        for row in self.gram:
            if len(row) != self.n:
                raise DimensionMismatchError("Gram matrix must be square")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise BilinearError("Gram matrix must be symmetric")
        self.det = mx.mat_det(ring, self.gram)
        if self.n and not self.det.is_unit():
            raise DegenerateError(f"det = {self.det!r} is not a unit of {ring.spec}")
        self._vector_cache = None
        self._q_buckets = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def diagonal(cls, ring: LocalRing, entries) -> "BilinearSpace":
        entries = tuple(entries)
        zero = ring.zero
        gram = tuple(
            tuple(entries[i] if i == j else zero for j in range(len(entries)))
            for i in range(len(entries))
        )
        return cls(ring, gram)

    @classmethod
    def hyperbolic(cls, ring: LocalRing) -> "BilinearSpace":
        z, one = ring.zero, ring.one
        return cls(ring, ((z, one), (one, z)))

    def orthogonal_sum(self, other: "BilinearSpace") -> "BilinearSpace":
        if other.ring != self.ring:
            raise BilinearError("summands must live over the same ring")
        z = self.ring.zero
        n, m = self.n, other.n
        gram = []
        for i in range(n):
            gram.append(tuple(self.gram[i]) + (z,) * m)
        for i in range(m):
            gram.append((z,) * n + tuple(other.gram[i]))
        return BilinearSpace(self.ring, gram)

    # -- evaluation ----------------------------------------------------------

    def eval_b(self, x, y) -> RingElement:
        if len(x) != self.n or len(y) != self.n:
            raise DimensionMismatchError(f"vectors must have length {self.n}")
        acc = self.ring.zero
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            row = self.gram[i]
            inner = self.ring.zero
            for j, yj in enumerate(y):
                if yj.is_zero():
                    continue
                inner = inner + row[j] * yj
            acc = acc + xi * inner
        return acc

    def eval_q(self, x) -> RingElement:
        return self.eval_b(x, x)

    # -- helpers -------------------------------------------------------------

    def standard_basis(self):
        one, zero = self.ring.one, self.ring.zero
        return tuple(
            tuple(one if i == j else zero for j in range(self.n))
            for i in range(self.n)
        )

    def zero_vector(self):
        return (self.ring.zero,) * self.n

    def all_vectors(self):
        if self._vector_cache is None:
            key = (self.ring.spec, self.n)
            if key not in _ALL_VECTORS:
                elems = tuple(self.ring.elements())
                _ALL_VECTORS[key] = tuple(itertools.product(elems, repeat=self.n))
            self._vector_cache = _ALL_VECTORS[key]
        return self._vector_cache

    def vectors_with_q(self, value: RingElement):
        if self._q_buckets is None:
            buckets: dict = {}
            for v in self.all_vectors():
                buckets.setdefault(self.eval_q(v).data, []).append(v)
            self._q_buckets = {k: tuple(vs) for k, vs in buckets.items()}
        return self._q_buckets.get(value.data, ())

    def reduce(self) -> "BilinearSpace":
        """The induced space over the residue field."""
        F = self.ring.residue_field()
        gram = tuple(tuple(self.ring.reduce(e) for e in row) for row in self.gram)
        return BilinearSpace(F, gram)

    def reduce_vector(self, v):
        return tuple(self.ring.reduce(c) for c in v)

    def to_json(self):
        return [[e.to_json() for e in row] for row in self.gram]

    @classmethod
    def from_json(cls, ring: LocalRing, obj) -> "BilinearSpace":
        gram = tuple(tuple(ring.element_from_json(e) for e in row) for row in obj)
        return cls(ring, gram)

    def __eq__(self, other):
        return (
            isinstance(other, BilinearSpace)
            and self.ring == other.ring
            and self.gram == other.gram
        )

    def __hash__(self):
        return hash((self.ring.spec, tuple(tuple(e.data for e in row) for row in self.gram)))

    def __repr__(self):
        return f"BilinearSpace({self.ring.spec}, n={self.n})"


def vec_add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def vec_sub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def vec_scale(c: RingElement, x):
    return tuple(c * a for a in x)


def vec_combo(vectors, coeffs):
    it = iter(zip(coeffs, vectors))
    c, v = next(it)
    acc = list(vec_scale(c, v))
    for c, v in it:
        for i, a in enumerate(v):
            acc[i] = acc[i] + c * a
    return tuple(acc)


class CongruenceWitness:
    """Invertible M with M^T * source * M = target, checked exactly."""

    def __init__(self, ring: LocalRing, source, target, matrix):
        self.ring = ring
        self.source = tuple(tuple(r) for r in source)
        self.target = tuple(tuple(r) for r in target)
        self.matrix = tuple(tuple(r) for r in matrix)
        ok, msg = self.check()
        if not ok:
            raise BilinearError(f"invalid congruence witness: {msg}")

    def check(self):
        got = mx.congruent(self.matrix, self.source)
        if got != self.target:
            return False, "M^T A M differs from the target"
        if self.matrix and not mx.mat_det(self.ring, self.matrix).is_unit():
            return False, "witness determinant is not a unit"
        return True, "ok"

    def inverse(self) -> "CongruenceWitness":
        Minv = mx.mat_inverse(self.ring, self.matrix)
        return CongruenceWitness(self.ring, self.target, self.source, Minv)

    def then(self, other: "CongruenceWitness") -> "CongruenceWitness":
        """Compose with a witness whose source is this witness's target."""
        if other.source != self.target:
            raise BilinearError("witnesses do not compose")
        return CongruenceWitness(
            self.ring, self.source, other.target, mx.mat_mul(self.matrix, other.matrix)
        )

    def to_json(self):
        return {
            "source": [[e.to_json() for e in row] for row in self.source],
            "target": [[e.to_json() for e in row] for row in self.target],
            "matrix": [[e.to_json() for e in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, ring: LocalRing, obj) -> "CongruenceWitness":
        def grid(key):
            return tuple(tuple(ring.element_from_json(e) for e in row) for row in obj[key])

        return cls(ring, grid("source"), grid("target"), grid("matrix"))


@dataclass
class DecompositionReport:
    units: tuple          # unit diagonal entries u_1..u_l
    blocks: tuple         # residual pairs (a_i, b_i), both in the maximal ideal
    witness: CongruenceWitness

    @property
    def l(self):
        return len(self.units)

    @property
    def r(self):
        return len(self.blocks)


def _block_diagonal_gram(ring, units, blocks):
    n = len(units) + 2 * len(blocks)
    z = ring.zero
    one = ring.one
    rows = [[z] * n for _ in range(n)]
    for i, u in enumerate(units):
        rows[i][i] = u
    off = len(units)
    for k, (a, b) in enumerate(blocks):
        i = off + 2 * k
        rows[i][i] = a
        rows[i][i + 1] = one
        rows[i + 1][i] = one
        rows[i + 1][i + 1] = b
    return tuple(tuple(r) for r in rows)


def orthogonal_complement(space: BilinearSpace, W):
    """Basis of {x : b(x, w) = 0 for all w in W}.

    When the restriction of b to span(W) is non-degenerate the result is a
    complement: together with W it spans the whole module.  The weaker cases
    that still admit a unit-pivot elimination (e.g. an isotropic vector over
    a field) return the null space alone.
    """
    W = [tuple(w) for w in W]
    for w in W:
        if len(w) != space.n:
            raise DimensionMismatchError("vectors must match the space dimension")
    if not W:
        return space.standard_basis()
    rows = tuple(
        tuple(space.eval_b(w, e) for e in space.standard_basis())
        for w in W
    )
    try:
        _, kernel = mx.kernel_basis(space.ring, rows)
    except mx.SingularMatrixError as exc:
        raise DegenerateSubspaceError(str(exc))
    return kernel


def _complement_within(space, basis, chosen):
    """Complement of `chosen` inside span(basis), as ambient vectors.

    Both inputs are tuples of ambient vectors; the restriction of b to
    span(chosen) must be non-degenerate.
    """
    rows = tuple(tuple(space.eval_b(c, v) for v in basis) for c in chosen)
    _, kernel = mx.kernel_basis(space.ring, rows)
    return tuple(vec_combo(basis, coeffs) for coeffs in kernel)


def _find_anisotropic(space, basis):
    """First vector of span(basis) with unit q-value: standard vectors of
    the sub-coordinate system first, then the full carrier scan."""
    for v in basis:
        if space.eval_q(v).is_unit():
            return v
    # In residue characteristic 2, cross terms carry a factor of 2 in the
    # maximal ideal, so q(span) stays in the ideal whenever all q(basis_i)
    # do; the carrier scan is provably fruitless then.
    F = space.ring.residue_field()
    char2 = F.size % 2 == 0
    if char2:
        return None
    elems = tuple(space.ring.elements())
    for coeffs in itertools.product(elems, repeat=len(basis)):
        v = vec_combo(basis, coeffs)
        if space.eval_q(v).is_unit():
            return v
    return None


def diagonalize(space: BilinearSpace):
    """Split off unit-valued lines, then residual rank-2 blocks.

    Returns (DecompositionReport, CongruenceWitness); the witness conjugates
    the Gram matrix to diag(u_1..u_l) with trailing blocks [[a,1],[1,b]],
    a, b in the maximal ideal.
    """
    ring = space.ring
    unit_cols: list = []
    block_cols: list = []
    blocks: list = []

    def rec(basis):
        if not basis:
            return
        pivot = _find_anisotropic(space, basis)
        if pivot is not None:
            unit_cols.append(pivot)
            rest = _complement_within(space, basis, (pivot,))
            rec(rest)
            return
        # all q-values in the maximal ideal: split off a rank-2 block
        pair = None
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                if space.eval_b(basis[i], basis[j]).is_unit():
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            raise DegenerateError("no unit pairing found; form is degenerate")
        x = basis[pair[0]]
        lam = space.eval_b(x, basis[pair[1]])
        y = vec_scale(lam.inv(), basis[pair[1]])
        blocks.append((space.eval_q(x), space.eval_q(y)))
        block_cols.append((x, y))
        rest = _complement_within(space, basis, (x, y))
        rec(rest)

    rec(space.standard_basis())

    cols = list(unit_cols)
    for x, y in block_cols:
        cols.append(x)
        cols.append(y)
    M = mx.mat_transpose(tuple(cols)) if cols else ()
    units = tuple(space.eval_q(v) for v in unit_cols)
    target = _block_diagonal_gram(ring, units, blocks)
    witness = CongruenceWitness(ring, space.gram, target, M)
    for a, b in blocks:
        if a.is_unit() or b.is_unit():
            raise BilinearError("residual block entries must be in the maximal ideal")
    return DecompositionReport(units, tuple(blocks), witness), witness


def resolve_block(ring: LocalRing, a: RingElement, b: RingElement):
    """Resolve [[a,1],[1,b]] + <-1> into three unit-diagonal lines.

    Returns ((u1, u2, u3), witness) where the witness conjugates the block
    Gram matrix (with a trailing -1) to diag(u1, u2, u3) exactly.
    """
    if a.is_unit() or b.is_unit():
        raise NotInMaximalIdealError("block entries must lie in the maximal ideal")
    one = ring.one
    z = ring.zero
    m1 = ring.minus_one
    ia = (m1 + a).inv()   # 1/(-1+a)
    ib = (m1 + b).inv()
    u1 = (one - a * b) * ia * ib
    u2 = m1 + a
    u3 = m1 + b
    source = (
        (a, one, z),
        (one, b, z),
        (z, z, m1),
    )
    target = ((u1, z, z), (z, u2, z), (z, z, u3))
    # transpose of the explicit 3x3 row matrix from the construction
    P = (
        (-ia, -ib, (m1 + a * b) * ia * ib),
        (m1, z, one),
        (z, m1, one),
    )
    M = mx.mat_transpose(P)
    witness = CongruenceWitness(ring, source, target, M)
    return (u1, u2, u3), witness


def stable_diagonalize(space: BilinearSpace):
    """Adjoin r copies of <-1> so the sum becomes diagonal.

    Returns (diagonal_units, r, witness) where the witness conjugates
    A + (-1) I_r to diag(diagonal_units); r is the number of residual
    blocks of diagonalize(space).
    """
    ring = space.ring
    report, witness = diagonalize(space)
    r = report.r
    m1 = ring.minus_one
    padded = space
    for _ in range(r):
        padded = padded.orthogonal_sum(BilinearSpace.diagonal(ring, (m1,)))
    n = space.n
    z, one = ring.zero, ring.one
    # step 1: (witness + identity on the padding) reaches blockdiag + (-1)^r
    W1 = []
    for i in range(n + r):
        row = []
        for j in range(n + r):
            if i < n and j < n:
                row.append(witness.matrix[i][j])
            else:
                row.append(one if i == j else z)
        W1.append(tuple(row))
    mid = mx.congruent(tuple(W1), padded.gram)
    # step 2: permute so each block is followed by one -1
    l = report.l
    perm = list(range(l))
    for k in range(r):
        perm.extend([l + 2 * k, l + 2 * k + 1, n + k])
    P = tuple(
        tuple(one if perm[j] == i else z for j in range(n + r))
        for i in range(n + r)
    )
    mid2 = mx.congruent(P, mid)
    # step 3: resolve each [block, -1] triple
    diag_units = list(report.units)
    blockwise = [mx.mat_identity(ring, l)] if l else []
    for a, b in report.blocks:
        (u1, u2, u3), bw = resolve_block(ring, a, b)
        diag_units.extend([u1, u2, u3])
        blockwise.append(bw.matrix)
    W3 = _direct_sum_matrices(ring, blockwise, n + r)
    total = mx.mat_mul(mx.mat_mul(tuple(W1), P), W3)
    target = tuple(
        tuple(diag_units[i] if i == j else z for j in range(n + r))
        for i in range(n + r)
    )
    final = CongruenceWitness(ring, padded.gram, target, total)
    return tuple(diag_units), r, final


def _direct_sum_matrices(ring, mats, size):
    z = ring.zero
    rows = [[z] * size for _ in range(size)]
    off = 0
    for m in mats:
        k = len(m)
        for i in range(k):
            for j in range(k):
                rows[off + i][off + j] = m[i][j]
        off += k
    for i in range(off, size):
        rows[i][i] = ring.one
    return tuple(tuple(r) for r in rows)


@dataclass
class IsometryResult:
    status: str                      # "isometric" | "not_isometric" | "unknown"
    witness: CongruenceWitness | None = None

    def __bool__(self):
        return self.status == "isometric"


DEFAULT_ISOMETRY_BUDGET = 2_000_000


def is_isometric(s1: BilinearSpace, s2: BilinearSpace, budget: int | None = None) -> IsometryResult:
    """Backtracking search for M with M^T A2 M = A1.

    Basis vectors of s1 are mapped to s2-vectors of equal q-value with
    matching pairings.  "not_isometric" is only returned once the search
    has exhausted all candidates; running out of budget yields "unknown".
    """
    if s1.ring != s2.ring:
        raise BilinearError("spaces must live over the same ring")
    if s1.n != s2.n:
        raise DimensionMismatchError("spaces must have equal dimension")
    n = s1.n
    ring = s1.ring
    if n == 0:
        return IsometryResult("isometric", CongruenceWitness(ring, (), (), ()))
    if budget is None:
        budget = DEFAULT_ISOMETRY_BUDGET
    spent = [0]
    chosen: list = []

    def extend(i: int) -> str:
        if i == n:
            return "found"
        for v in s2.vectors_with_q(s1.gram[i][i]):
            spent[0] += 1
            if spent[0] > budget:
                return "budget"
            ok = True
            for j, w in enumerate(chosen):
                if s2.eval_b(w, v) != s1.gram[j][i]:
                    ok = False
                    break
            if not ok:
                continue
            chosen.append(v)
            res = extend(i + 1)
            if res != "fail":
                if res == "found":
                    return "found"
                return res
            chosen.pop()
        return "fail"

    res = extend(0)
    if res == "found":
        M = mx.mat_transpose(tuple(chosen))
        det = mx.mat_det(ring, M)
        if not det.is_unit():  # pragma: no cover - implied by unit Gram dets
            raise BilinearError("isometry witness degenerated")
        return IsometryResult("isometric", CongruenceWitness(ring, s2.gram, s1.gram, M))
    if res == "budget":
        return IsometryResult("unknown")
    return IsometryResult("not_isometric")


def steinberg_witness(ring: LocalRing, a: RingElement) -> CongruenceWitness:
    """diag(a, 1-a) = diag(1, a(1-a)) via the explicit 2x2 matrix."""
    one = ring.one
    if not a.is_unit() or not (one - a).is_unit():
        raise NonUnitError("both a and 1-a must be units")
    z = ring.zero
    b = one - a
    source = ((a, z), (z, b))
    target = ((one, z), (z, a * b))
    M = ((one, b), (-one, a))
    return CongruenceWitness(ring, source, target, M)


def hyperbolic_scaling_witness(ring: LocalRing, u: RingElement) -> CongruenceWitness:
    """[[0,1],[1,0]] = u * [[0,1],[1,0]] via the explicit 2x2 matrix."""
    if not u.is_unit():
        raise NonUnitError("scaling factor must be a unit")
    z, one = ring.zero, ring.one
    source = ((z, one), (one, z))
    target = ((z, u), (u, z))
    M = ((z, u), (one, z))
    return CongruenceWitness(ring, source, target, M)


@dataclass
class CheckResult:
    ok: bool
    reason: str = "ok"

    def __bool__(self):
        return self.ok


def check_representation_identity(a, b, c, d, x, y, s, t, f) -> CheckResult:
    """Exact check of f = c((asx+bty)/c)^2 + d((tx-sy)/c)^2.

    Preconditions (violations are reported, not raised): a, b units,
    c = a x^2 + b y^2 a unit, d = abc, f = a s^2 + b t^2.
    """
    if not a.is_unit() or not b.is_unit():
        return CheckResult(False, "a and b must be units")
    if not c.is_unit():
        return CheckResult(False, "c must be a unit")
    if c != a * x * x + b * y * y:
        return CheckResult(False, "c != a*x^2 + b*y^2")
    if d != a * b * c:
        return CheckResult(False, "d != a*b*c")
    if f != a * s * s + b * t * t:
        return CheckResult(False, "f != a*s^2 + b*t^2")
    ci = c.inv()
    p = (a * s * x + b * t * y) * ci
    r = (t * x - s * y) * ci
    if f == c * p * p + d * r * r:
        return CheckResult(True)
    return CheckResult(False, "identity failed")
