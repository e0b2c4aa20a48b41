"""GW(R), K0^MW(R), and W(R) as finitely presented abelian groups.

Presentations use all units of R as generators.  The Milnor-Witt relations
(square triviality, hyperbolic annihilation, Steinberg) are closed into an
additive lattice by multiplying each ideal generator with every group-ring
basis element.  GW adds rows for verified isometries of small diagonal
forms; every emitted row is backed by either an explicit congruence witness
or an exhaustive two-dimensional search, so the relation lattice never
over-collapses.

Group structure is computed by integer Smith normal form with retained
transforms, which makes generator images, representative lifting, products,
and lattice-membership tests exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

from .rings import LocalRing, RingElement
from .bilinear import BilinearSpace, is_isometric, stable_diagonalize
from . import snf


class GroupsError(Exception):
    pass


# ---------------------------------------------------------------------------
# group ring elements
# ---------------------------------------------------------------------------


class GroupRingElement:
    """Finitely supported integer combination of unit classes in Z[R*]."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: LocalRing, coeffs: dict | None = None):
        self.ring = ring
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def generator(cls, a: RingElement) -> "GroupRingElement":
        if not a.is_unit():
            raise GroupsError(f"{a!r} is not a unit")
        return cls(a.ring, {a.data: 1})

    @classmethod
    def one(cls, ring: LocalRing) -> "GroupRingElement":
        return cls(ring, {ring.one.data: 1})

    @classmethod
    def pfister(cls, a: RingElement) -> "GroupRingElement":
        """<<a>> = <1> - <a>."""
        out = cls.one(a.ring).coeffs.copy()
        out[a.data] = out.get(a.data, 0) - 1
        return cls(a.ring, out)

    @classmethod
    def hyperbolic(cls, ring: LocalRing) -> "GroupRingElement":
        """h = <1> + <-1>."""
        out: dict = {}
        out[ring.one.data] = 1
        m1 = ring.minus_one.data
        out[m1] = out.get(m1, 0) + 1
        return cls(ring, out)

    def __add__(self, other):
        out = self.coeffs.copy()
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return GroupRingElement(self.ring, out)

    def __sub__(self, other):
        out = self.coeffs.copy()
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) - v
        return GroupRingElement(self.ring, out)

    def __neg__(self):
        return GroupRingElement(self.ring, {k: -v for k, v in self.coeffs.items()})

    def scale(self, n: int):
        return GroupRingElement(self.ring, {k: n * v for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        out: dict = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                k = self.ring._rmul(ka, kb)
                out[k] = out.get(k, 0) + va * vb
        return GroupRingElement(self.ring, out)

    __rmul__ = __mul__

    def is_zero(self):
        return not self.coeffs

    def rank(self):
        return sum(self.coeffs.values())

    def to_row(self, index: dict) -> tuple:
        row = [0] * len(index)
        for k, v in self.coeffs.items():
            row[index[k]] += v
        return tuple(row)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, key=self.ring._rkey):
            parts.append(f"{self.coeffs[k]:+d}<{self.ring.format_element(k)}>")
        return "".join(parts)


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass
class Presentation:
    ring: LocalRing
    generators: tuple            # tuple of unit RingElements, canonical order
    rows: tuple                  # tuple of int tuples, deduped
    kind: str
    notes: dict = dc_field(default_factory=dict)

    def generator_index(self):
        return {g.data: i for i, g in enumerate(self.generators)}

    def check_rank_zero_rows(self):
        for row in self.rows:
            if sum(row) != 0:
                raise GroupsError(f"relation row {row} has nonzero coefficient sum")


def _unit_generators(ring: LocalRing):
    return tuple(ring.units())


def _dedupe_rows(rows):
    seen = set()
    out = []
    for r in rows:
        if not any(r):
            continue
        key = r
        negkey = tuple(-x for x in r)
        if key in seen or negkey in seen:
            continue
        seen.add(key)
        out.append(r)
    return tuple(out)


def _ideal_rows(ring, index, ideal_generators):
    """Additive closure: every <u> * generator, u running over all units."""
    rows = []
    for u in ring.units():
        gu = GroupRingElement.generator(u)
        for gen in ideal_generators:
            rows.append((gu * gen).to_row(index))
    return rows


def _kmw_ideal_generators(ring):
    one = GroupRingElement.one(ring)
    h = GroupRingElement.hyperbolic(ring)
    gens = []
    for a in ring.units():
        asq = a * a
        gens.append(one - GroupRingElement.generator(asq))          # <<a^2>>
        gens.append(GroupRingElement.pfister(a) * h)                # <<a>> h
        if (ring.one - a).is_unit():
            gens.append(
                GroupRingElement.pfister(a)
                * GroupRingElement.pfister(ring.one - a)
            )                                                       # Steinberg
    return gens


def _steinberg_ideal_generators(ring):
    gens = []
    for a in ring.units():
        if (ring.one - a).is_unit():
            gens.append(
                GroupRingElement.pfister(a)
                * GroupRingElement.pfister(ring.one - a)
            )
    return gens


_presentation_cache: dict = {}


def kmw_presentation(ring: LocalRing) -> Presentation:
    """Z[R*] modulo the square, hyperbolic, and Steinberg relations."""
    key = ("kmw", ring.spec)
    if key not in _presentation_cache:
        gens = _unit_generators(ring)
        index = {g.data: i for i, g in enumerate(gens)}
        rows = _dedupe_rows(_ideal_rows(ring, index, _kmw_ideal_generators(ring)))
        p = Presentation(ring, gens, rows, "kmw")
        p.check_rank_zero_rows()
        _presentation_cache[key] = p
    return _presentation_cache[key]


def ktilde_presentation(ring: LocalRing) -> Presentation:
    """Steinberg relation only (the ring written K~0^MW)."""
    key = ("ktilde", ring.spec)
    if key not in _presentation_cache:
        gens = _unit_generators(ring)
        index = {g.data: i for i, g in enumerate(gens)}
        rows = _dedupe_rows(_ideal_rows(ring, index, _steinberg_ideal_generators(ring)))
        p = Presentation(ring, gens, rows, "ktilde")
        p.check_rank_zero_rows()
        _presentation_cache[key] = p
    return _presentation_cache[key]


def gw_presentation(ring: LocalRing, rank_cap: int | None = None) -> Presentation:
    """Kernel rows of Z[R*] -> GW(R): the Milnor-Witt rows plus rows from
    verified isometries among diagonal forms of rank <= rank_cap.

    For residue field != F_2 the rank-2 rows are provably sufficient, so
    rank_cap defaults to 2 there and to 3 for residue field F_2 (where no
    exactness theorem exists; undecided pairs are recorded in notes).
    """
    F = ring.residue_field()
    if rank_cap is None:
        rank_cap = 2 if F.size != 2 else 3
    key = ("gw", ring.spec, rank_cap)
    if key not in _presentation_cache:
        gens = _unit_generators(ring)
        index = {g.data: i for i, g in enumerate(gens)}
        rows = list(_ideal_rows(ring, index, _kmw_ideal_generators(ring)))
        iso_rows, notes = _isometry_rows(ring, index, rank_cap)
        rows.extend(iso_rows)
        p = Presentation(ring, gens, _dedupe_rows(rows), "gw", notes)
        p.check_rank_zero_rows()
        _presentation_cache[key] = p
    return _presentation_cache[key]


def witt_presentation(ring: LocalRing, rank_cap: int | None = None) -> Presentation:
    """GW presentation extended by the ideal generated by h."""
    base = gw_presentation(ring, rank_cap)
    index = base.generator_index()
    h = GroupRingElement.hyperbolic(ring)
    rows = list(base.rows)
    rows.extend(_ideal_rows(ring, index, [h]))
    key = ("witt", ring.spec, rank_cap)
    if key not in _presentation_cache:
        p = Presentation(ring, base.generators, _dedupe_rows(rows), "witt", dict(base.notes))
        _presentation_cache[key] = p
    return _presentation_cache[key]


# ---------------------------------------------------------------------------
# square-class tuple machinery (shared by gw rows and the oracle)
# ---------------------------------------------------------------------------


class _ClassData:
    """Square-class reps with multiplication and per-class q-distributions."""

    def __init__(self, ring: LocalRing):
        self.ring = ring
        sc = ring.square_classes()
        self.reps = sc.reps
        self.k = len(self.reps)
        self.index = {r.data: i for i, r in enumerate(self.reps)}
        self.class_of = lambda u: sc.class_index[u.data]
        self.mul = [
            [sc.class_index[(a * b).data] for b in self.reps] for a in self.reps
        ]
        self.one_class = sc.class_index[ring.one.data]
        carrier = tuple(ring.elements())
        self._coord_dist = []
        for rep in self.reps:
            dist: dict = {}
            for x in carrier:
                v = (rep * x * x).data
                dist[v] = dist.get(v, 0) + 1
            self._coord_dist.append(dist)
        self._space_cache: dict = {}

    def det_class(self, tup):
        acc = self.one_class
        for c in tup:
            acc = self.mul[acc][c]
        return acc

    def q_distribution(self, tup):
        """Exact distribution of q over all vectors for diag(reps[tup])."""
        ring = self.ring
        acc = {ring.zero.data: 1}
        for c in tup:
            dist = self._coord_dist[c]
            nxt: dict = {}
            for va, ca in acc.items():
                for vb, cb in dist.items():
                    k = ring._radd(va, vb)
                    nxt[k] = nxt.get(k, 0) + ca * cb
            acc = nxt
        return tuple(sorted((ring._rkey(k), v) for k, v in acc.items()))

    def space_of(self, tup) -> BilinearSpace:
        if tup not in self._space_cache:
            self._space_cache[tup] = BilinearSpace.diagonal(
                self.ring, tuple(self.reps[c] for c in tup)
            )
        return self._space_cache[tup]


_class_data_cache: dict = {}


def _class_data(ring) -> _ClassData:
    if ring.spec not in _class_data_cache:
        _class_data_cache[ring.spec] = _ClassData(ring)
    return _class_data_cache[ring.spec]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


_rank2_cache: dict = {}
_FULL_SEARCH_SPACE_CAP = 1 << 16
_FULL_SEARCH_BUDGET = 400_000


def _rank2_pairs(ring):
    """Partition of unordered square-class pairs by plain isometry.

    Complete: the two-dimensional search is exhaustive, so both positive and
    negative answers are certain.
    """
    if ring.spec in _rank2_cache:
        return _rank2_cache[ring.spec]
    cd = _class_data(ring)
    pairs = list(itertools.combinations_with_replacement(range(cd.k), 2))
    uf = _UnionFind()
    for p in pairs:
        uf.find(p)
    for pa, pb in itertools.combinations(pairs, 2):
        if cd.det_class(pa) != cd.det_class(pb):
            continue
        if uf.find(pa) == uf.find(pb):
            continue
        res = is_isometric(cd.space_of(pa), cd.space_of(pb))
        if res.status == "isometric":
            uf.union(pa, pb)
        elif res.status == "unknown":  # pragma: no cover - tiny spaces
            raise GroupsError("rank-2 isometry search ran out of budget")
    _rank2_cache[ring.spec] = (cd, uf, pairs)
    return _rank2_cache[ring.spec]


def _multiset_components(ring, m):
    """Connected components of rank-m class multisets under verified
    two-entry rewrites (sound for every ring; complete whenever the chain
    lemma applies, i.e. residue field != F_2)."""
    cd, uf2, pairs = _rank2_pairs(ring)
    pair_groups: dict = {}
    for p in pairs:
        pair_groups.setdefault(uf2.find(p), []).append(p)
    nodes = list(itertools.combinations_with_replacement(range(cd.k), m))
    uf = _UnionFind()
    for node in nodes:
        uf.find(node)
    for node in nodes:
        for i, j in itertools.combinations(range(m), 2):
            rest = tuple(node[t] for t in range(m) if t not in (i, j))
            key = tuple(sorted((node[i], node[j])))
            for other in pair_groups[uf2.find(key)]:
                if other == key:
                    continue
                neighbor = tuple(sorted(rest + other))
                uf.union(node, neighbor)
    return cd, uf, nodes


def _isometry_rows(ring, index, rank_cap):
    """Rows <a_1>+..+<a_m> - <b_1>-..-<b_m> for verified rank-m isometries."""
    rows = []
    notes: dict = {"rank_cap": rank_cap, "undecided": []}
    cd, uf2, pairs = _rank2_pairs(ring)

    def row_for(ta, tb):
        r = [0] * len(index)
        for c in ta:
            r[index[cd.reps[c].data]] += 1
        for c in tb:
            r[index[cd.reps[c].data]] -= 1
        return tuple(r)

    groups: dict = {}
    for p in pairs:
        groups.setdefault(uf2.find(p), []).append(p)
    for members in groups.values():
        base = members[0]
        for other in members[1:]:
            rows.append(row_for(base, other))

    for m in range(3, rank_cap + 1):
        cd2, uf, nodes = _multiset_components(ring, m)
        comp: dict = {}
        for node in nodes:
            comp.setdefault(uf.find(node), []).append(node)
        # try to decide pairs of distinct components with matching invariants
        reps = sorted(comp)
        for ra, rb in itertools.combinations(reps, 2):
            a, b = comp[ra][0], comp[rb][0]
            if cd.det_class(a) != cd.det_class(b):
                continue
            if cd.q_distribution(a) != cd.q_distribution(b):
                continue
            if ring.size ** m > _FULL_SEARCH_SPACE_CAP:
                notes["undecided"].append((a, b))
                continue
            res = is_isometric(cd.space_of(a), cd.space_of(b), budget=_FULL_SEARCH_BUDGET)
            if res.status == "isometric":
                rows.append(row_for(a, b))
                uf.union(a, b)
            elif res.status == "unknown":
                notes["undecided"].append((a, b))
        comp2: dict = {}
        for node in nodes:
            comp2.setdefault(uf.find(node), []).append(node)
        for members in comp2.values():
            base = members[0]
            for other in members[1:]:
                rows.append(row_for(base, other))
    if not notes["undecided"]:
        notes.pop("undecided")
    return rows, notes


# ---------------------------------------------------------------------------
# group structure via SNF
# ---------------------------------------------------------------------------


class AbelianGroupStructure:
    """Invariant factors plus an exact coordinate map from generators.

    Coordinates are tuples: torsion entries first (reduced mod the aligned
    invariant factor), then free entries.
    """

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self.ring = presentation.ring
        self.generators = presentation.generators
        g = len(self.generators)
        self._g = g
        reduced = snf.hnf_rows([list(r) for r in presentation.rows], g)
        self._lattice_basis = reduced
        form = snf.smith_normal_form([list(r) for r in reduced], g)
        if not form.verify([list(r) for r in reduced]):
            raise GroupsError("Smith normal form self-check failed")
        self._snf = form
        self._V = form.V
        self._Vinv = snf.int_inverse_unimodular(form.V)
        self._diag = form.diag
        rank = len(form.diag)
        if rank != len(reduced):
            raise GroupsError("relation lattice rank accounting failed")
        self._rank = rank
        self._torsion_positions = [i for i, d in enumerate(form.diag) if d >= 2]
        self.invariant_factors = tuple(form.diag[i] for i in self._torsion_positions)
        self.free_rank = g - rank
        self._index = {gen.data: i for i, gen in enumerate(self.generators)}
        for row in presentation.rows:
            if not self.is_zero(self.coords_of_row(row)):
                raise GroupsError("a relation row does not map to zero")

    # -- coordinate plumbing -------------------------------------------------

    def coords_of_row(self, row):
        y = [sum(row[i] * self._V[i][j] for i in range(self._g)) for j in range(self._g)]
        torsion = tuple(
            y[i] % self._diag[i] for i in self._torsion_positions
        )
        free = tuple(y[i] for i in range(self._rank, self._g))
        return torsion + free

    def coords_of_group_ring(self, elt: GroupRingElement):
        return self.coords_of_row(elt.to_row(self._index))

    def coords_of_generator(self, u: RingElement):
        return self.coords_of_group_ring(GroupRingElement.generator(u))

    def generator_images(self):
        return {
            self.ring.format_element(gen.data): list(self.coords_of_generator(gen))
            for gen in self.generators
        }

    @property
    def zero_coords(self):
        return (0,) * (len(self.invariant_factors) + self.free_rank)

    def is_zero(self, coords):
        return all(c == 0 for c in coords)

    def add_coords(self, a, b):
        return self._normalize(tuple(x + y for x, y in zip(a, b)))

    def scale_coords(self, n, a):
        return self._normalize(tuple(n * x for x in a))

    def _normalize(self, coords):
        nt = len(self.invariant_factors)
        torsion = tuple(
            c % d for c, d in zip(coords[:nt], self.invariant_factors)
        )
        return torsion + coords[nt:]

    def order(self):
        if self.free_rank:
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def torsion_order(self):
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def section(self, coords):
        """A generator-coefficient vector mapping to the given coordinates."""
        nt = len(self.invariant_factors)
        y = [0] * self._g
        for pos, c in zip(self._torsion_positions, coords[:nt]):
            y[pos] = c
        for i, c in enumerate(coords[nt:]):
            y[self._rank + i] = c
        x = [sum(y[i] * self._Vinv[i][j] for i in range(self._g)) for j in range(self._g)]
        return tuple(x)

    def section_group_ring(self, coords) -> GroupRingElement:
        x = self.section(coords)
        return GroupRingElement(
            self.ring,
            {gen.data: c for gen, c in zip(self.generators, x) if c},
        )

    def product(self, a, b):
        """Induced ring product on coordinates (lift, multiply, project)."""
        ea = self.section_group_ring(a)
        eb = self.section_group_ring(b)
        return self.coords_of_group_ring(ea * eb)

    def contains_in_lattice(self, elt: GroupRingElement) -> bool:
        """True iff elt lies in the relation lattice (class is zero)."""
        return self.is_zero(self.coords_of_group_ring(elt))

    def to_json(self):
        return {
            "free_rank": self.free_rank,
            "invariant_factors": list(self.invariant_factors),
            "generator_images": self.generator_images(),
        }

    def describe(self):
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.invariant_factors]
        return " + ".join(parts) if parts else "0"


_structure_cache: dict = {}


def group_structure(presentation: Presentation) -> AbelianGroupStructure:
    key = (presentation.kind, presentation.ring.spec, presentation.notes.get("rank_cap"))
    if key not in _structure_cache:
        _structure_cache[key] = AbelianGroupStructure(presentation)
    return _structure_cache[key]


def kmw_structure(ring: LocalRing) -> AbelianGroupStructure:
    return group_structure(kmw_presentation(ring))


def gw_structure(ring: LocalRing, rank_cap: int | None = None) -> AbelianGroupStructure:
    s = group_structure(gw_presentation(ring, rank_cap))
    # soundness guard: distinct determinant classes stay distinct in GW
    if s.free_rank == 1 and s.torsion_order() < len(ring.square_classes()):
        raise GroupsError(
            "GW lattice over-collapsed below the determinant invariant"
        )
    return s


def witt_structure(ring: LocalRing, rank_cap: int | None = None) -> AbelianGroupStructure:
    return group_structure(witt_presentation(ring, rank_cap))


def ktilde_structure(ring: LocalRing) -> AbelianGroupStructure:
    return group_structure(ktilde_presentation(ring))


def augmentation_ideal(presentation: Presentation) -> AbelianGroupStructure:
    """Structure of the kernel of the rank map: drop the <1> column.

    Valid because every relation row has coefficient sum zero, hence is a
    combination of the differences <u> - <1>.
    """
    presentation.check_rank_zero_rows()
    ring = presentation.ring
    one_data = ring.one.data
    gens = tuple(g for g in presentation.generators if g.data != one_data)
    keep = [i for i, g in enumerate(presentation.generators) if g.data != one_data]
    rows = tuple(tuple(r[i] for i in keep) for r in presentation.rows)
    sub = Presentation(ring, gens, _dedupe_rows(rows), presentation.kind + "-augmentation")
    return AbelianGroupStructure(sub)


# ---------------------------------------------------------------------------
# comparison map K0^MW -> GW
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    ring: LocalRing
    kmw: AbelianGroupStructure
    gw: AbelianGroupStructure
    matrix: list                    # images of KMW coordinate basis vectors
    kernel_invariant_factors: tuple
    kernel_free_rank: int
    is_isomorphism: bool

    def kernel_order(self):
        if self.kernel_free_rank:
            return None
        out = 1
        for d in self.kernel_invariant_factors:
            out *= d
        return out

    def to_json(self):
        return {
            "kernel": {
                "free_rank": self.kernel_free_rank,
                "invariant_factors": list(self.kernel_invariant_factors),
            },
            "cokernel": {"free_rank": 0, "invariant_factors": []},
            "is_isomorphism": self.is_isomorphism,
            "matrix": self.matrix,
        }


def comparison_map(ring: LocalRing, rank_cap: int | None = None) -> ComparisonReport:
    """The surjection K0^MW(R) -> GW(R), <u> -> <u>, in structure coordinates.

    Its kernel is the quotient of the GW relation lattice by the Milnor-Witt
    relation lattice (the map is induced by the identity of Z[R*]).
    """
    pk = kmw_presentation(ring)
    pg = gw_presentation(ring, rank_cap)
    sk = group_structure(pk)
    sg = gw_structure(ring, rank_cap)
    g = len(pk.generators)

    # matrix: image of each KMW coordinate basis vector inside GW coordinates
    dim_k = len(sk.invariant_factors) + sk.free_rank
    matrix = []
    for i in range(dim_k):
        unit_coords = tuple(1 if j == i else 0 for j in range(dim_k))
        x = sk.section(unit_coords)
        matrix.append(list(sg.coords_of_row(x)))

    # kernel = L_GW / L_KMW
    basis = snf.hnf_rows([list(r) for r in pg.rows], g)
    rel_rows = []
    for row in pk.rows:
        coeffs = snf.solve_in_rowspace(basis, row)
        if coeffs is None:
            raise GroupsError("Milnor-Witt row missing from the GW lattice")
        rel_rows.append(coeffs)
    r = len(basis)
    form = snf.smith_normal_form(rel_rows, r) if r else snf.smith_normal_form([], 0)
    factors = tuple(d for d in form.diag if d >= 2)
    kernel_free = r - len(form.diag)
    is_iso = not factors and kernel_free == 0
    return ComparisonReport(ring, sk, sg, matrix, factors, kernel_free, is_iso)


# ---------------------------------------------------------------------------
# classes of spaces and products
# ---------------------------------------------------------------------------


def gw_class(space: BilinearSpace, structure: AbelianGroupStructure | None = None):
    """Coordinates of [space] in GW(R): stably diagonalize, then map
    sum <u_i> - r <-1> through the structure."""
    if structure is None:
        structure = gw_structure(space.ring)
    units, r, _ = stable_diagonalize(space)
    elt = GroupRingElement(space.ring)
    for u in units:
        elt = elt + GroupRingElement.generator(u)
    elt = elt - GroupRingElement.generator(space.ring.minus_one).scale(r)
    return structure.coords_of_group_ring(elt)


def product_table(structure: AbelianGroupStructure):
    """Products of generator pairs in structure coordinates."""
    out = {}
    for a in structure.generators:
        for b in structure.generators:
            key = (
                structure.ring.format_element(a.data),
                structure.ring.format_element(b.data),
            )
            out[key] = structure.coords_of_generator(a * b)
    return out


# ---------------------------------------------------------------------------
# identity reports
# ---------------------------------------------------------------------------


@dataclass
class SteinbergReport:
    ring: LocalRing
    asserted: bool
    annihilation_failures: list
    square_hyperbolic_failures: list

    @property
    def ok(self):
        return not self.annihilation_failures and not self.square_hyperbolic_failures

    def to_json(self):
        fmt = self.ring.format_element
        return {
            "ring": self.ring.spec,
            "asserted": self.asserted,
            "annihilation_failures": [fmt(a) for a in self.annihilation_failures],
            "square_hyperbolic_failures": [fmt(a) for a in self.square_hyperbolic_failures],
        }


def verify_steinberg_consequences(ring: LocalRing) -> SteinbergReport:
    """Check <<a>><<-a>> = 0 and <<a^2>> = <<a>> h in the Steinberg-only
    quotient for every unit a.

    The identities are theorems when the residue field avoids F_2 and F_3;
    for other rings the report is informational.
    """
    F = ring.residue_field()
    asserted = F.size not in (2, 3)
    s = ktilde_structure(ring)
    h = GroupRingElement.hyperbolic(ring)
    ann_failures = []
    sq_failures = []
    for a in ring.units():
        pa = GroupRingElement.pfister(a)
        pna = GroupRingElement.pfister(-a)
        if not s.contains_in_lattice(pa * pna):
            ann_failures.append(a.data)
        lhs = GroupRingElement.pfister(a * a)
        rhs = pa * h
        if not s.contains_in_lattice(lhs - rhs):
            sq_failures.append(a.data)
    return SteinbergReport(ring, asserted, ann_failures, sq_failures)


@dataclass
class Rank2Report:
    ring: LocalRing
    samples: int
    failures: int

    @property
    def ok(self):
        return self.failures == 0


def verify_rank2_equality(ring: LocalRing, samples: int, rng) -> Rank2Report:
    """For witnessed isometries <a,b> = <c,d>, the difference row lies in
    the Milnor-Witt relation lattice (residue field != F_2)."""
    if ring.residue_field().size == 2:
        raise GroupsError("the rank-2 equality is only claimed away from residue field F_2")
    s = kmw_structure(ring)
    from .bilinear import vec_combo  # local import to keep module deps flat

    failures = 0
    done = 0
    while done < samples:
        a, b = ring.random_unit(rng), ring.random_unit(rng)
        space = BilinearSpace.diagonal(ring, (a, b))
        v = (ring.random_element(rng), ring.random_element(rng))
        if not space.eval_q(v).is_unit():
            continue
        # complement generator inside the plane
        e1, e2 = space.standard_basis()
        w = tuple(
            space.eval_b(e2, v) * x - space.eval_b(e1, v) * y
            for x, y in zip(e1, e2)
        )
        if not space.eval_q(w).is_unit():
            continue
        c, d = space.eval_q(v), space.eval_q(w)
        elt = (
            GroupRingElement.generator(a)
            + GroupRingElement.generator(b)
            - GroupRingElement.generator(c)
            - GroupRingElement.generator(d)
        )
        if not s.contains_in_lattice(elt):
            failures += 1
        done += 1
    return Rank2Report(ring, samples, failures)


# ---------------------------------------------------------------------------
# stable isometry oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleClassification:
    ring: LocalRing
    rank_cap: int
    stab_cap: int
    classes: dict                    # rank -> tuple of tuples of multisets
    undecided: list
    _class_of: dict = dc_field(default_factory=dict)

    def same_class(self, tup_a, tup_b) -> bool:
        if len(tup_a) != len(tup_b):
            return False
        return self._class_of[tuple(sorted(tup_a))] == self._class_of[tuple(sorted(tup_b))]

    def to_json(self):
        cd = _class_data(self.ring)
        fmt = lambda tup: [repr(cd.reps[c]) for c in tup]
        return {
            "ring": self.ring.spec,
            "rank_cap": self.rank_cap,
            "stab_cap": self.stab_cap,
            "classes": {
                str(rank): [[fmt(t) for t in comp] for comp in comps]
                for rank, comps in self.classes.items()
            },
            "undecided": [[fmt(a), fmt(b)] for a, b in self.undecided],
        }


_oracle_cache: dict = {}


def stable_isometry_oracle(ring: LocalRing, rank_cap: int = 3,
                           stab_cap: int = 2) -> OracleClassification:
    """Classify diagonal unit tuples of rank <= rank_cap up to isometry
    after padding both sides with <1>^s, s <= stab_cap.

    Identification is by verified two-entry rewrites at the top padding
    level, or by an explicit witness search at any padding (an isometry at
    padding s extends to s+1 by adding a hyperbolic fixed line, so smaller
    paddings may decide pairs whose top level is out of search range).
    Separation is by determinant class, by the exact q-value distribution
    at the top level, or by an exhausted search there.  Pairs beyond all
    methods are reported as undecided rather than guessed.
    """
    key = (ring.spec, rank_cap, stab_cap)
    if key in _oracle_cache:
        return _oracle_cache[key]
    cd = _class_data(ring)
    undecided: list = []
    classes: dict = {}
    class_of: dict = {}
    for m in range(1, rank_cap + 1):
        top = m + stab_cap
        _, uf, _ = _multiset_components(ring, top)
        nodes = list(itertools.combinations_with_replacement(range(cd.k), m))
        pad_top = (cd.one_class,) * stab_cap

        def padded(t, s=stab_cap):
            return tuple(sorted(t + (cd.one_class,) * s))

        buckets: dict = {}
        for t in nodes:
            buckets.setdefault(uf.find(padded(t)), []).append(t)
        reps = sorted(buckets)
        for ra, rb in itertools.combinations(reps, 2):
            a, b = buckets[ra][0], buckets[rb][0]
            if cd.det_class(a) != cd.det_class(b):
                continue
            pa_top, pb_top = padded(a), padded(b)
            if cd.q_distribution(pa_top) != cd.q_distribution(pb_top):
                continue
            decided = False
            for s in range(stab_cap + 1):
                if ring.size ** (m + s) > _FULL_SEARCH_SPACE_CAP:
                    break
                pa, pb = padded(a, s), padded(b, s)
                if cd.q_distribution(pa) != cd.q_distribution(pb):
                    continue  # not isometric at this padding, maybe above
                res = is_isometric(
                    cd.space_of(pa), cd.space_of(pb), budget=_FULL_SEARCH_BUDGET
                )
                if res.status == "isometric":
                    uf.union(pa_top, pb_top)
                    decided = True
                    break
                if res.status == "not_isometric" and s == stab_cap:
                    decided = True  # exhausted at the top level: separated
                    break
            if not decided:
                undecided.append((a, b))
        buckets = {}
        for t in nodes:
            root = uf.find(padded(t))
            buckets.setdefault(root, []).append(t)
            class_of[t] = root
        classes[m] = tuple(tuple(sorted(v)) for _, v in sorted(buckets.items()))
    result = OracleClassification(ring, rank_cap, stab_cap, classes, undecided, class_of)
    _oracle_cache[key] = result
    return result


def oracle_tuple_of_units(ring, units):
    """Square-class index tuple for a tuple of unit elements."""
    cd = _class_data(ring)
    sc = ring.square_classes()
    return tuple(sorted(sc.class_index[u.data] for u in units))
