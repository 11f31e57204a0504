"""Finite ordered simplicial complexes and their cochains over Z and Q.

Vertices carry a total order (their position in ``K.vertices``); every simplex
is stored as the increasing tuple of vertex positions, so the alternating-sum
coboundary and the Alexander-Whitney cup need no further orientation data.
"""

from __future__ import annotations

import ast
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .groups import DiffCohGroup, FgAbGroup, NotAComplex, Subgroup, SubQuotient, cohomology_at
from .linalg import ExactMatrix, block_diag

__all__ = [
    "SimplicialComplex",
    "Cochain",
    "CochainComplex",
    "SignCocycle",
    "SimplicialMap",
    "CechDoubleComplex",
    "NotACocycle",
    "BadCover",
    "SpaceParseError",
    "build_sphere",
    "build_product",
    "circle",
    "point",
    "simplex",
    "cone",
    "disjoint_union",
    "hemispheres",
    "coboundary",
    "cup",
    "local_system_complex",
    "cochain_complex",
    "cohomology",
    "betti",
    "torsion",
    "projection",
    "local_system_coboundary",
    "cech_double_complex",
    "total_cohomology",
    "u1_cohomology",
    "u1_subquotient",
    "parse_space",
    "load_space",
]


class NotACocycle(ValueError):
    pass


class BadCover(ValueError):
    pass


class SpaceParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def _sort_sign(seq) -> tuple[int, tuple]:
    """Sign of the permutation sorting ``seq`` (0 if a value repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


class SimplicialComplex:
    """A finite simplicial complex with totally ordered vertices."""

    def __init__(self, vertices, facets, name: str = ""):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("repeated vertex label")
        self.name = name
        pos = {v: i for i, v in enumerate(self.vertices)}
        self._pos = pos
        faces: set[tuple[int, ...]] = {(i,) for i in range(len(self.vertices))}
        tops = []
        for f in facets:
            f = list(f)
            if not f:
                continue
            try:
                idx = tuple(sorted(pos[v] for v in f))
            except KeyError as e:
                raise ValueError(f"facet {f} uses undeclared vertex {e.args[0]!r}") from None
            if len(set(idx)) != len(idx):
                raise ValueError(f"facet {f} repeats a vertex")
            tops.append(idx)
            for r in range(1, len(idx) + 1):
                faces.update(itertools.combinations(idx, r))
        self.dim = max((len(s) for s in faces), default=0) - 1
        self.simplices: list[list[tuple[int, ...]]] = [[] for _ in range(self.dim + 1)]
        for s in sorted(faces, key=lambda s: (len(s), s)):
            self.simplices[len(s) - 1].append(s)
        self.index = [{s: i for i, s in enumerate(lvl)} for lvl in self.simplices]
        self._faceset = faces
        self._cache: dict = {}

    # basic queries
    def n_simplices(self, d: int) -> int:
        return len(self.simplices[d]) if 0 <= d <= self.dim else 0

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.simplices)

    def has_simplex(self, s) -> bool:
        return tuple(sorted(s)) in self._faceset

    @cached_property
    def facets(self) -> list[tuple[int, ...]]:
        out = []
        for d in range(self.dim, -1, -1):
            for s in self.simplices[d]:
                if not any(set(s) < set(t) for t in out):
                    out.append(s)
        return sorted(out)

    def labels(self, s) -> tuple:
        return tuple(self.vertices[i] for i in s)

    def position(self, v) -> int:
        return self._pos[v]

    def __repr__(self) -> str:
        return f"SimplicialComplex({self.name or '?'}, f={self.f_vector})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self.vertices == other.vertices and self._faceset == other._faceset

    __hash__ = object.__hash__

    # subcomplexes
    def subcomplex(self, facets, name: str = "") -> "SimplicialComplex":
        """Subcomplex generated by facets given as position tuples; keeps the vertex order."""
        facets = [tuple(f) for f in facets]
        for f in facets:
            if not self.has_simplex(f):
                raise ValueError(f"{f} is not a simplex of {self.name}")
        used = sorted({i for f in facets for i in f})
        return SimplicialComplex([self.vertices[i] for i in used], [[self.vertices[i] for i in f] for f in facets], name)

    def inclusion_positions(self, sub: "SimplicialComplex") -> list[int]:
        return [self._pos[v] for v in sub.vertices]

    def restriction(self, sub: "SimplicialComplex", d: int, kind: str = "Z") -> ExactMatrix:
        """Restriction ``C^d(self) -> C^d(sub)`` for a subcomplex with compatible order."""
        emb = self.inclusion_positions(sub)
        if emb != sorted(emb):
            raise ValueError("subcomplex vertex order is not induced")
        rows = sub.n_simplices(d)
        cols = self.n_simplices(d)
        M = [[0] * cols for _ in range(rows)]
        for i, s in enumerate(sub.simplices[d] if d <= sub.dim else []):
            M[i][self.index[d][tuple(emb[j] for j in s)]] = 1
        return ExactMatrix(M, kind, (rows, cols))

    def extension_by_zero(self, sub: "SimplicialComplex", d: int, kind: str = "Z") -> ExactMatrix:
        return self.restriction(sub, d, kind).T

    def closed_star(self, s) -> set[tuple[int, ...]]:
        """All simplices t with t union s a simplex."""
        s = set(s)
        return {t for t in self._faceset if self.has_simplex(tuple(s | set(t)))}


# --------------------------------------------------------------------------
# builders


def build_sphere(n: int) -> SimplicialComplex:
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    verts = list(range(n + 2))
    return SimplicialComplex(verts, [[v for v in verts if v != i] for i in verts], f"sphere({n})")


def circle(m: int) -> SimplicialComplex:
    if m < 3:
        raise ValueError("an m-gon needs m >= 3")
    return SimplicialComplex(range(m), [[i, (i + 1) % m] for i in range(m)], f"circle({m})")


def point() -> SimplicialComplex:
    return SimplicialComplex([0], [[0]], "point")


def simplex(n: int) -> SimplicialComplex:
    return SimplicialComplex(range(n + 1), [list(range(n + 1))], f"simplex({n})")


def cone(K: SimplicialComplex, apex="*") -> SimplicialComplex:
    """Cone with the apex placed last in the order."""
    facets = [list(K.labels(f)) + [apex] for f in K.facets]
    return SimplicialComplex(list(K.vertices) + [apex], facets, f"cone({K.name})")


def disjoint_union(K: SimplicialComplex, L: SimplicialComplex) -> SimplicialComplex:
    verts = [(0, v) for v in K.vertices] + [(1, v) for v in L.vertices]
    facets = [[(0, v) for v in K.labels(f)] for f in K.facets] + [[(1, v) for v in L.labels(f)] for f in L.facets]
    return SimplicialComplex(verts, facets, f"({K.name} + {L.name})")


def _staircases(a: tuple, b: tuple):
    """Maximal chains in the grid a x b (monotone lattice paths)."""
    p, q = len(a) - 1, len(b) - 1
    for ups in itertools.combinations(range(p + q), p):
        i = j = 0
        path = [(a[0], b[0])]
        ups = set(ups)
        for step in range(p + q):
            if step in ups:
                i += 1
            else:
                j += 1
            path.append((a[i], b[j]))
        yield path


def build_product(K: SimplicialComplex, L: SimplicialComplex) -> SimplicialComplex:
    """Staircase triangulation of |K| x |L|; vertices ordered lexicographically."""
    verts = [(v, w) for v in K.vertices for w in L.vertices]
    facets = []
    for f in K.facets:
        for g in L.facets:
            for path in _staircases(K.labels(f), L.labels(g)):
                facets.append(path)
    return SimplicialComplex(verts, facets, f"product({K.name},{L.name})")


def hemispheres(K: SimplicialComplex) -> tuple[SimplicialComplex, SimplicialComplex]:
    """Split into the facets containing vertex 0 and the rest (closed under faces)."""
    U = [f for f in K.facets if 0 in f]
    V = [f for f in K.facets if 0 not in f]
    if not U or not V:
        raise ValueError("no nontrivial split through vertex 0")
    return K.subcomplex(U, f"{K.name}|U"), K.subcomplex(V, f"{K.name}|V")


# --------------------------------------------------------------------------
# cochains


def coboundary(K: SimplicialComplex, degree: int, kind: str = "Z") -> ExactMatrix:
    """Matrix of ``delta: C^degree -> C^(degree+1)``."""
    key = ("cob", degree, kind)
    if key in K._cache:
        return K._cache[key]
    rows = K.n_simplices(degree + 1)
    cols = K.n_simplices(degree) if degree >= 0 else 0
    M = [[0] * cols for _ in range(rows)]
    if rows and cols:
        idx = K.index[degree]
        for r, s in enumerate(K.simplices[degree + 1]):
            for i in range(len(s)):
                M[r][idx[s[:i] + s[i + 1:]]] += -1 if i % 2 else 1
    out = ExactMatrix(M, kind, (rows, cols))
    K._cache[key] = out
    return out


@dataclass(frozen=True)
class Cochain:
    """A cochain as a value vector over ``K.simplices[degree]``."""

    K: SimplicialComplex
    degree: int
    values: tuple
    kind: str = "Z"

    def __post_init__(self):
        if len(self.values) != self.K.n_simplices(self.degree):
            raise ValueError(f"expected {self.K.n_simplices(self.degree)} values in degree {self.degree}")
        vals = tuple(Fraction(x) for x in self.values)
        if self.kind == "Z":
            if any(v.denominator != 1 for v in vals):
                raise ValueError("integer cochain with non-integral value")
            vals = tuple(int(v) for v in vals)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, K, degree, kind="Z") -> "Cochain":
        return cls(K, degree, (0,) * K.n_simplices(degree), kind)

    @classmethod
    def constant(cls, K, c=1, kind="Z") -> "Cochain":
        return cls(K, 0, (c,) * K.n_simplices(0), kind)

    @classmethod
    def from_dict(cls, K, degree, coeffs: dict, kind="Z") -> "Cochain":
        """Values keyed by simplices given as vertex-label tuples (any order; sign follows)."""
        vals = [0] * K.n_simplices(degree)
        for simp, c in coeffs.items():
            simp = tuple(simp) if isinstance(simp, (tuple, list)) else (simp,)
            if len(simp) != degree + 1:
                raise ValueError(f"simplex {simp} has wrong degree for a {degree}-cochain")
            try:
                sign, key = _sort_sign(K.position(v) for v in simp)
            except KeyError:
                raise ValueError(f"simplex {simp} names an unknown vertex") from None
            if sign == 0 or key not in K.index[degree]:
                raise ValueError(f"simplex {simp} is not in the complex")
            vals[K.index[degree][key]] += sign * Fraction(c)
        return cls(K, degree, tuple(vals), kind)

    def to_dict(self) -> dict:
        return {self.K.labels(s): v for s, v in zip(self.K.simplices[self.degree] if self.degree <= self.K.dim else [], self.values) if v}

    def as_kind(self, kind: str) -> "Cochain":
        return Cochain(self.K, self.degree, self.values, kind)

    def is_zero(self) -> bool:
        return not any(self.values)

    def _check(self, other):
        if other.K is not self.K or other.degree != self.degree:
            raise ValueError("cochains live in different groups")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        kind = "Z" if self.kind == other.kind == "Z" else "Q"
        return Cochain(self.K, self.degree, tuple(a + b for a, b in zip(self.values, other.values)), kind)

    def __neg__(self) -> "Cochain":
        return Cochain(self.K, self.degree, tuple(-a for a in self.values), self.kind)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Cochain":
        c = Fraction(c)
        kind = self.kind if c.denominator == 1 else "Q"
        return Cochain(self.K, self.degree, tuple(c * a for a in self.values), kind)

    def coboundary(self) -> "Cochain":
        M = coboundary(self.K, self.degree, "Q")
        vals = [sum((M[i, j] * self.values[j] for j in range(M.cols) if self.values[j]), Fraction(0)) for i in range(M.rows)]
        return Cochain(self.K, self.degree + 1, tuple(vals), self.kind)

    def __str__(self) -> str:
        return f"C^{self.degree}{self.to_dict()}"


def cup(a: Cochain, b: Cochain) -> Cochain:
    """Alexander-Whitney cup product; degrees outside 0..dim K give the zero cochain."""
    if a.K is not b.K:
        raise ValueError("cup of cochains on different complexes")
    K = a.K
    p, q = a.degree, b.degree
    kind = "Z" if a.kind == b.kind == "Z" else "Q"
    n = p + q
    if n > K.dim or p < 0 or q < 0:
        return Cochain(K, n, (0,) * K.n_simplices(n) if n >= 0 else (), kind)
    ia, ib = K.index[p], K.index[q]
    vals = []
    for s in K.simplices[n]:
        x = a.values[ia[s[: p + 1]]]
        vals.append(x * b.values[ib[s[p:]]] if x else 0)
    return Cochain(K, n, tuple(vals), kind)


def cup_left_matrix(a: Cochain, q: int, kind: str = "Q") -> ExactMatrix:
    """Matrix of ``x -> a cup x`` from C^q to C^(p+q)."""
    K = a.K
    p = a.degree
    n = p + q
    rows, cols = K.n_simplices(n), K.n_simplices(q)
    M = [[0] * cols for _ in range(rows)]
    if rows and cols:
        ia, ib = K.index[p], K.index[q]
        for r, s in enumerate(K.simplices[n]):
            x = a.values[ia[s[: p + 1]]]
            if x:
                M[r][ib[s[p:]]] = x
    return ExactMatrix(M, kind, (rows, cols))


def cup_right_matrix(b: Cochain, p: int, kind: str = "Q") -> ExactMatrix:
    """Matrix of ``x -> x cup b`` from C^p to C^(p+q)."""
    K = b.K
    q = b.degree
    n = p + q
    rows, cols = K.n_simplices(n), K.n_simplices(p)
    M = [[0] * cols for _ in range(rows)]
    if rows and cols:
        ia, ib = K.index[p], K.index[q]
        for r, s in enumerate(K.simplices[n]):
            y = b.values[ib[s[p:]]]
            if y:
                M[r][ia[s[: p + 1]]] = y
    return ExactMatrix(M, kind, (rows, cols))


# --------------------------------------------------------------------------
# cochain complexes


class CochainComplex:
    """``C^0 -> C^1 -> ... -> C^top`` with ``diffs[p]: C^p -> C^(p+1)``."""

    def __init__(self, dims, diffs, kind: str = "Z", check: bool = True, name: str = ""):
        self.dims = tuple(dims)
        self.diffs = tuple(diffs)
        self.kind = kind
        self.name = name
        if len(self.diffs) != len(self.dims):
            raise ValueError("need one differential per degree (the last maps to 0)")
        for p, d in enumerate(self.diffs):
            tgt = self.dims[p + 1] if p + 1 < len(self.dims) else 0
            if d.shape != (tgt, self.dims[p]):
                raise ValueError(f"differential {p} has shape {d.shape}, expected {(tgt, self.dims[p])}")
        if check and not self.is_complex():
            raise NotAComplex(f"{name or 'complex'}: d o d != 0")

    def is_complex(self) -> bool:
        return all((b @ a).is_zero() for a, b in zip(self.diffs, self.diffs[1:]))

    def d(self, p: int) -> ExactMatrix:
        if p < 0:
            return ExactMatrix.zeros(self.dims[0] if self.dims else 0, 0, self.kind)
        if p >= len(self.dims):
            return ExactMatrix.zeros(0, 0, self.kind)
        return self.diffs[p]

    def cohomology(self, p: int) -> FgAbGroup:
        if p < 0 or p >= len(self.dims):
            return FgAbGroup()
        return cohomology_at(self.d(p - 1), self.d(p))

    def all_cohomology(self) -> list[FgAbGroup]:
        return [self.cohomology(p) for p in range(len(self.dims))]

    def as_kind(self, kind: str) -> "CochainComplex":
        return CochainComplex(self.dims, [d.as_kind(kind) for d in self.diffs], kind, False, self.name)


def cochain_complex(K: SimplicialComplex, kind: str = "Z") -> CochainComplex:
    dims = [K.n_simplices(p) for p in range(K.dim + 1)]
    return CochainComplex(dims, [coboundary(K, p, kind) for p in range(K.dim + 1)], kind, name=K.name)


def cohomology(K: SimplicialComplex, kind: str = "Z") -> list[FgAbGroup]:
    return cochain_complex(K, kind).all_cohomology()


def betti(K: SimplicialComplex, p: int) -> int:
    if p < 0 or p > K.dim:
        return 0
    return cochain_complex(K, "Q").cohomology(p).free_rank


def torsion(K: SimplicialComplex, p: int) -> tuple[int, ...]:
    if p < 0 or p > K.dim:
        return ()
    return cochain_complex(K, "Z").cohomology(p).invariant_factors


# --------------------------------------------------------------------------
# sign local systems


class SignCocycle:
    """Edge signs satisfying eps(v0v1) eps(v1v2) = eps(v0v2) on every triangle."""

    def __init__(self, K: SimplicialComplex, values: dict | None = None, check: bool = True):
        self.K = K
        vals = [1] * K.n_simplices(1)
        for e, s in (values or {}).items():
            try:
                key = tuple(sorted(K.position(v) for v in e))
            except KeyError:
                raise NotACocycle(f"edge {e} names an unknown vertex") from None
            if key not in K.index[1]:
                raise NotACocycle(f"{e} is not an edge")
            if s not in (1, -1):
                raise NotACocycle(f"edge {e} carries {s}, not a sign")
            vals[K.index[1][key]] = s
        self.values = tuple(vals)
        if check:
            bad = self.defect()
            if bad is not None:
                raise NotACocycle(f"cocycle condition fails on triangle {K.labels(bad)}")

    def eps(self, a: int, b: int) -> int:
        return self.values[self.K.index[1][(a, b)]]

    def defect(self):
        if self.K.dim < 2:
            return None
        for t in self.K.simplices[2]:
            a, b, c = t
            if self.eps(a, b) * self.eps(b, c) != self.eps(a, c):
                return t
        return None

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values)

    def gauge(self, signs) -> "SignCocycle":
        """Cohomologous cocycle eps'(ab) = s(a) eps(ab) s(b)."""
        out = SignCocycle(self.K, None, check=False)
        out.values = tuple(signs[a] * self.eps(a, b) * signs[b] for a, b in self.K.simplices[1])
        return out


def local_system_coboundary(K: SimplicialComplex, eps: SignCocycle, degree: int, kind: str = "Z") -> ExactMatrix:
    rows = K.n_simplices(degree + 1)
    cols = K.n_simplices(degree)
    M = [[0] * cols for _ in range(rows)]
    if rows and cols:
        idx = K.index[degree]
        for r, s in enumerate(K.simplices[degree + 1]):
            M[r][idx[s[1:]]] += eps.eps(s[0], s[1])
            for i in range(1, len(s)):
                M[r][idx[s[:i] + s[i + 1:]]] += -1 if i % 2 else 1
    return ExactMatrix(M, kind, (rows, cols))


def local_system_complex(K: SimplicialComplex, eps: SignCocycle, kind: str = "Z") -> CochainComplex:
    bad = eps.defect()
    if bad is not None:
        raise NotACocycle(f"cocycle condition fails on triangle {K.labels(bad)}")
    dims = [K.n_simplices(p) for p in range(K.dim + 1)]
    return CochainComplex(dims, [local_system_coboundary(K, eps, p, kind) for p in range(K.dim + 1)], kind, name=f"{K.name}[eps]")


# --------------------------------------------------------------------------
# simplicial maps


class SimplicialMap:
    """Vertex map ``K -> L`` sending simplices to simplices."""

    def __init__(self, K: SimplicialComplex, L: SimplicialComplex, vertex_map: dict):
        self.K, self.L = K, L
        self.vmap = [L.position(vertex_map[v]) for v in K.vertices]
        for d in range(K.dim + 1):
            for s in K.simplices[d]:
                if not L.has_simplex(tuple({self.vmap[i] for i in s})):
                    raise ValueError(f"image of {K.labels(s)} is not a simplex")

    def pullback_matrix(self, degree: int, kind: str = "Z") -> ExactMatrix:
        K, L = self.K, self.L
        rows, cols = K.n_simplices(degree), L.n_simplices(degree)
        M = [[0] * cols for _ in range(rows)]
        for r, s in enumerate(K.simplices[degree] if degree <= K.dim else []):
            sign, t = _sort_sign(self.vmap[i] for i in s)
            if sign:
                M[r][L.index[degree][t]] = sign
        return ExactMatrix(M, kind, (rows, cols))

    def pullback(self, c: Cochain) -> Cochain:
        M = self.pullback_matrix(c.degree, "Q")
        vals = [sum((M[i, j] * c.values[j] for j in range(M.cols) if c.values[j]), Fraction(0)) for i in range(M.rows)]
        return Cochain(self.K, c.degree, tuple(vals), c.kind)


def projection(P: SimplicialComplex, factor: int = 0) -> SimplicialMap:
    """Projection of a product complex onto one factor (labels are pairs)."""
    verts = {v[factor] for v in P.vertices}
    # rebuild the factor from the images of facets
    order = []
    for v in P.vertices:
        if v[factor] not in order:
            order.append(v[factor])
    if factor == 1:
        order.sort(key=lambda w: [x[1] for x in P.vertices].index(w))
    facets = {tuple(sorted({x[factor] for x in P.labels(f)}, key=order.index)) for f in P.facets}
    F = SimplicialComplex(order, facets)
    assert set(F.vertices) == verts
    return SimplicialMap(P, F, {v: v[factor] for v in P.vertices})


# --------------------------------------------------------------------------
# Cech double complex over the vertex-star cover


@dataclass
class CechDoubleComplex:
    """``C^{p,q} = sum over p-simplices tau of C^q(U_tau)`` with ``D = d + (-1)^q delta``.

    The sign is indexed by the degree q of the cochain acted on, which is the
    reading under which D squares to zero (d and delta commute).

    ``U_tau`` is modelled by the closure of the intersection of the open vertex
    stars indexed by tau (the closed star of tau for the default cover).
    """

    K: SimplicialComplex
    kind: str
    pieces: dict  # tau -> subcomplex model of U_tau
    blocks: dict  # (p, q) -> list of (tau, offset, size)
    dims: dict  # (p, q) -> total size
    total: CochainComplex

    def nerve_simplices(self):
        return sorted(self.pieces, key=lambda t: (len(t), t))


def _open_star_cover(K: SimplicialComplex) -> dict:
    return {v: {s for s in K._faceset if v in s} for v in range(len(K.vertices))}


def cech_double_complex(K: SimplicialComplex, kind: str = "Z", cover: dict | None = None) -> CechDoubleComplex:
    """Assemble the total complex of the Cech double complex of a vertex-indexed cover.

    ``cover`` maps vertex positions to sets of simplices of K (open sets of the
    face poset); the default is the open-star cover.  The nerve must be K and
    every nonempty intersection must be acyclic.
    """
    cover = cover or _open_star_cover(K)
    if sorted(cover) != list(range(len(K.vertices))):
        raise BadCover("the cover must be indexed by the vertices")
    pieces = {}
    # nerve: index sets with nonempty intersection
    for r in range(1, len(K.vertices) + 1):
        found = False
        for tau in itertools.combinations(range(len(K.vertices)), r):
            inter = set.intersection(*(cover[v] for v in tau))
            if inter:
                found = True
                if not K.has_simplex(tau):
                    raise BadCover(f"nerve contains {K.labels(tau)} which is not a simplex")
                closure = {f for s in inter for k in range(1, len(s) + 1) for f in itertools.combinations(s, k)}
                pieces[tau] = K.subcomplex(sorted(closure), f"U{K.labels(tau)}")
            elif K.has_simplex(tau):
                raise BadCover(f"simplex {K.labels(tau)} missing from the nerve")
        if not found:
            break
    for tau, U in pieces.items():
        H = cohomology(U, kind)
        if H[0] != FgAbGroup(1) or any(not g.is_trivial() for g in H[1:]):
            raise BadCover(f"intersection over {K.labels(tau)} is not acyclic")

    top_p = max(len(t) for t in pieces) - 1
    top_q = max(U.dim for U in pieces.values())
    by_p = {p: sorted(t for t in pieces if len(t) == p + 1) for p in range(top_p + 1)}
    blocks, dims = {}, {}
    for p in range(top_p + 1):
        for q in range(top_q + 1):
            off = 0
            lst = []
            for tau in by_p[p]:
                n = pieces[tau].n_simplices(q)
                lst.append((tau, off, n))
                off += n
            blocks[(p, q)] = lst
            dims[(p, q)] = off
    # total degree t = p + q; order summands by p
    tmax = top_p + top_q
    tdims, toffs = [], {}
    for t in range(tmax + 1):
        off = 0
        for p in range(max(0, t - top_q), min(t, top_p) + 1):
            toffs[(p, t - p)] = off
            off += dims[(p, t - p)]
        tdims.append(off)
    diffs = []
    for t in range(tmax + 1):
        rows = tdims[t + 1] if t + 1 <= tmax else 0
        M: dict[tuple[int, int], int] = {}
        for (p, q), off in toffs.items():
            if p + q != t:
                continue
            # d: (p, q) -> (p, q+1)
            if q + 1 <= top_q and (p, q + 1) in toffs:
                roff = toffs[(p, q + 1)]
                for (tau, o, n), (_, o2, _n2) in zip(blocks[(p, q)], blocks[(p, q + 1)]):
                    U = pieces[tau]
                    if q + 1 > U.dim:
                        continue
                    idx = U.index[q]
                    for i, s in enumerate(U.simplices[q + 1]):
                        for k in range(len(s)):
                            key = (roff + o2 + i, off + o + idx[s[:k] + s[k + 1:]])
                            M[key] = M.get(key, 0) + (-1 if k % 2 else 1)
            # (-1)^q delta: (p, q) -> (p+1, q); the sign follows the cochain degree q
            if (p + 1, q) in toffs:
                roff = toffs[(p + 1, q)]
                sgn = -1 if q % 2 else 1
                src = {tau: (o, n) for tau, o, n in blocks[(p, q)]}
                for sigma, o2, n2 in blocks[(p + 1, q)]:
                    Us = pieces[sigma]
                    for i in range(len(sigma)):
                        face = sigma[:i] + sigma[i + 1:]
                        if face not in src:
                            continue
                        o, _ = src[face]
                        Uf = pieces[face]
                        c = sgn * (-1 if i % 2 else 1)
                        emb = [Uf.position(v) for v in Us.vertices]
                        for r, s in enumerate(Us.simplices[q] if q <= Us.dim else []):
                            j = Uf.index[q][tuple(emb[k] for k in s)]
                            key = (roff + o2 + r, off + o + j)
                            M[key] = M.get(key, 0) + c
        diffs.append(ExactMatrix.from_sparse(M, (rows, tdims[t]), kind))
    total = CochainComplex(tdims, diffs, kind, name=f"cech({K.name})")
    return CechDoubleComplex(K, kind, pieces, blocks, dims, total)


def total_cohomology(C: CechDoubleComplex) -> list[FgAbGroup]:
    return C.total.all_cohomology()


# --------------------------------------------------------------------------
# Q/Z coefficients


def u1_cohomology(K: SimplicialComplex, n: int) -> DiffCohGroup:
    """``H^n(K; Q/Z)``: a torus for each Betti number plus torsion of ``H^(n+1)(K; Z)``."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    return DiffCohGroup(0, betti(K, n), 0, torsion(K, n + 1))


def u1_subquotient(K: SimplicialComplex, n: int) -> SubQuotient:
    """``{x in C^n(Q) : delta x integral} / (C^n(Z) + delta C^(n-1)(Q))`` as a concrete group."""
    N = K.n_simplices(n)
    full = Subgroup.full_space(N)
    dn = coboundary(K, n, "Q")
    num = full.preimage(dn.q, Subgroup.integer_points(dn.rows))
    den = Subgroup.integer_points(N)
    if n >= 1:
        den = den + full.__class__(N, space=Subgroup.full_space(K.n_simplices(n - 1)).image(coboundary(K, n - 1, "Q").q).space)
    return SubQuotient(num, den, f"H^{n}(Q/Z)")


# --------------------------------------------------------------------------
# space files


_MACRO = re.compile(r"^\s*(sphere|circle|product|point|cone|simplex|union)\b")


def _eval_macro(expr: str) -> SimplicialComplex:
    try:
        tree = ast.parse(expr.strip(), mode="eval").body
    except SyntaxError as e:
        raise SpaceParseError(f"cannot parse builder expression {expr!r}: {e.msg}") from None

    def ev(node):
        if isinstance(node, ast.Name) and node.id == "point":
            return point()
        if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
            raise SpaceParseError(f"unexpected expression {ast.unparse(node)!r}")
        fn = node.func.id
        args = node.args
        if fn in ("sphere", "circle", "simplex"):
            if len(args) != 1 or not isinstance(args[0], ast.Constant) or not isinstance(args[0].value, int):
                raise SpaceParseError(f"{fn} takes one integer argument")
            try:
                return {"sphere": build_sphere, "circle": circle, "simplex": simplex}[fn](args[0].value)
            except ValueError as e:
                raise SpaceParseError(str(e)) from None
        if fn == "point" and not args:
            return point()
        if fn == "product" and len(args) == 2:
            return build_product(ev(args[0]), ev(args[1]))
        if fn == "union" and len(args) == 2:
            return disjoint_union(ev(args[0]), ev(args[1]))
        if fn == "cone" and len(args) == 1:
            return cone(ev(args[0]))
        raise SpaceParseError(f"unknown builder {fn} with {len(args)} arguments")

    K = ev(tree)
    K.name = expr.strip()
    return K


def parse_space(text: str) -> SimplicialComplex:
    """Parse a space description: a builder expression or ``vertices:``/``facets:`` lines.

    Facets must only use declared vertices and no facet may be a face of
    another one.
    """
    lines = [(i + 1, l.split("#", 1)[0].strip()) for i, l in enumerate(text.splitlines())]
    lines = [(i, l) for i, l in lines if l]
    if not lines:
        raise SpaceParseError("empty space description")
    if len(lines) == 1 and _MACRO.match(lines[0][1]):
        return _eval_macro(lines[0][1])
    fields = {}
    for ln, l in lines:
        if ":" not in l:
            raise SpaceParseError(f"expected 'key: value', got {l!r}", ln)
        key, val = (x.strip() for x in l.split(":", 1))
        if key not in ("vertices", "facets", "name"):
            raise SpaceParseError(f"unknown key {key!r}", ln)
        if key in fields:
            raise SpaceParseError(f"duplicate key {key!r}", ln)
        if key == "name":
            fields[key] = (ln, val)
            continue
        try:
            fields[key] = (ln, ast.literal_eval(val))
        except (ValueError, SyntaxError):
            raise SpaceParseError(f"cannot read {key} list", ln) from None
    for key in ("vertices", "facets"):
        if key not in fields:
            raise SpaceParseError(f"missing '{key}:' line")
    vln, verts = fields["vertices"]
    fln, facets = fields["facets"]
    if not isinstance(verts, (list, tuple)) or len(set(verts)) != len(verts):
        raise SpaceParseError("vertices must be a list of distinct labels", vln)
    vset = set(verts)
    fsets = []
    for f in facets:
        if not isinstance(f, (list, tuple)) or not f:
            raise SpaceParseError(f"facet {f!r} is not a nonempty list", fln)
        missing = [v for v in f if v not in vset]
        if missing:
            raise SpaceParseError(f"facet {list(f)} uses undeclared vertex {missing[0]!r}", fln)
        if len(set(f)) != len(f):
            raise SpaceParseError(f"facet {list(f)} repeats a vertex", fln)
        fsets.append(frozenset(f))
    for a in fsets:
        for b in fsets:
            if a < b:
                raise SpaceParseError(f"facet {sorted(a, key=verts.index)} is a face of {sorted(b, key=verts.index)}", fln)
    name = fields.get("name", (0, "file"))[1]
    return SimplicialComplex(verts, facets, name)


def load_space(spec: str) -> SimplicialComplex:
    """A builder expression or a path to a space file."""
    if _MACRO.match(spec):
        return _eval_macro(spec)
    with open(spec) as fh:
        return parse_space(fh.read())
