"""Discrete Deligne complexes, their periodic totals, the diamond and the cup product.

A weight-n differential cochain of degree m is a triple (c, h, w) with c an
integral m-cochain, h a rational (m-1)-cochain and w a rational m-cochain
that is forced to vanish when m < n.  The differential is

    d(c, h, w) = (delta c,  w - c - delta h,  delta w).

Every complex in this package is a ``BlockComplex``: in each degree t the
group is a list of cochain blocks, integral ones contributing a lattice and
rational ones a subspace of the ambient Q^N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .groups import (
    CompositionMismatch,
    DiffCohGroup,
    ExactnessReport,
    GroupMap,
    Subgroup,
    SubQuotient,
    check_exact,
    quotient_descriptor,
)
from .linalg import ExactMatrix, block_diag
from .simplicial import (
    Cochain,
    SimplicialComplex,
    betti,
    coboundary,
    cup,
    torsion,
)

__all__ = [
    "WeightMismatch",
    "DiffCochain",
    "PeriodicDiffCochain",
    "Block",
    "BlockComplex",
    "deligne_complex",
    "periodic_complex",
    "diff_cohomology",
    "diff_cohomology_closed_form",
    "periodic_weights",
    "periodic_deligne_split",
    "periodic_deligne_direct",
    "DiamondData",
    "diamond",
    "check_diamond",
    "db_cup",
    "unit",
]


class WeightMismatch(ValueError):
    pass


# --------------------------------------------------------------------------
# differential cochains


@dataclass(frozen=True)
class DiffCochain:
    """Weight-n triple (c, h, w) in degree m."""

    n: int
    c: Cochain
    h: Cochain
    w: Cochain

    def __post_init__(self):
        m = self.c.degree
        if self.h.degree != m - 1 or self.w.degree != m:
            raise WeightMismatch(f"component degrees ({self.c.degree}, {self.h.degree}, {self.w.degree}) are not (m, m-1, m)")
        if self.c.kind != "Z":
            raise WeightMismatch("the c component must be integral")
        if m < self.n and not self.w.is_zero():
            raise WeightMismatch(f"w must vanish in degree {m} below weight {self.n}")
        if not (self.c.K is self.h.K is self.w.K):
            raise WeightMismatch("components live on different complexes")

    @property
    def K(self) -> SimplicialComplex:
        return self.c.K

    @property
    def degree(self) -> int:
        return self.c.degree

    @classmethod
    def zero(cls, K, n, m) -> "DiffCochain":
        return cls(n, Cochain.zero(K, m), Cochain.zero(K, m - 1, "Q"), Cochain.zero(K, m, "Q"))

    @classmethod
    def make(cls, K, n, c=None, h=None, w=None, m=None) -> "DiffCochain":
        """Build from value sequences or Cochains (missing parts are zero)."""
        if m is None:
            m = next(x.degree for x in (c, h, w) if isinstance(x, Cochain)) if any(isinstance(x, Cochain) for x in (c, h, w)) else n

        def as_c(x, deg, kind):
            if x is None:
                return Cochain.zero(K, deg, kind)
            if isinstance(x, Cochain):
                return x.as_kind(kind)
            if isinstance(x, dict):
                return Cochain.from_dict(K, deg, x, kind)
            return Cochain(K, deg, tuple(x), kind)

        return cls(n, as_c(c, m, "Z"), as_c(h, m - 1, "Q"), as_c(w, m, "Q"))

    def d(self) -> "DiffCochain":
        c, h, w = self.c, self.h, self.w
        return DiffCochain(self.n, c.coboundary(), w - c.as_kind("Q") - h.coboundary(), w.coboundary())

    def is_cocycle(self) -> bool:
        return self.d().is_zero()

    def is_zero(self) -> bool:
        return self.c.is_zero() and self.h.is_zero() and self.w.is_zero()

    def __add__(self, other: "DiffCochain") -> "DiffCochain":
        if other.n != self.n:
            raise WeightMismatch("adding cochains of different weight")
        return DiffCochain(self.n, self.c + other.c, self.h + other.h, self.w + other.w)

    def __neg__(self) -> "DiffCochain":
        return DiffCochain(self.n, -self.c, -self.h, -self.w)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int) -> "DiffCochain":
        return DiffCochain(self.n, self.c.scale(k), self.h.scale(k), self.w.scale(k))

    def include(self, n: int) -> "DiffCochain":
        """View in the weight-n complex for n <= self.n (subcomplex inclusion)."""
        if n > self.n:
            raise WeightMismatch("can only include into lower weight")
        return DiffCochain(n, self.c, self.h, self.w)

    def R(self) -> Cochain:
        return self.w

    def I(self) -> Cochain:
        return self.c

    def vector(self) -> list[Fraction]:
        return list(map(Fraction, self.c.values + self.h.values)) + list(self.w.values if self.degree >= self.n else ())

    def __str__(self) -> str:
        return f"DiffCochain(n={self.n}, m={self.degree}, c={self.c.to_dict()}, h={self.h.to_dict()}, w={self.w.to_dict()})"


def unit(K: SimplicialComplex) -> DiffCochain:
    return DiffCochain(0, Cochain.constant(K, 1), Cochain.zero(K, -1, "Q"), Cochain.constant(K, 1, "Q"))


def db_cup(x: DiffCochain, y: DiffCochain) -> DiffCochain:
    """Cup product of triples: (c1 c2, (-1)^m1 c1 h2 + h1 w2, w1 w2).

    Satisfies d(xy) = dx y + (-1)^m1 x dy and is associative on cochains;
    on classes it is the degree-wise product whose local shape is c c in the
    integral slot and h dw' in the comparison slot.
    """
    if x.K is not y.K:
        raise WeightMismatch("cup of cochains on different complexes")
    m1 = x.degree
    sign = -1 if m1 % 2 else 1
    c = cup(x.c, y.c)
    h = cup(x.c, y.h).as_kind("Q").scale(sign) + cup(x.h, y.w)
    w = cup(x.w, y.w).as_kind("Q")
    return DiffCochain(x.n + y.n, c, h, w)


@dataclass(frozen=True)
class PeriodicDiffCochain:
    """A family of weight-(2k[+1]) components of a fixed total degree t."""

    parity: str
    components: tuple  # DiffCochain, one per weight

    def __post_init__(self):
        want = 0 if self.parity == "ev" else 1
        for x in self.components:
            if x.n % 2 != want:
                raise WeightMismatch(f"weight {x.n} in a {self.parity} family")
        ts = {x.degree - x.n for x in self.components}
        if len(ts) > 1:
            raise WeightMismatch("components of different total degree")


# --------------------------------------------------------------------------
# block complexes


@dataclass(frozen=True)
class Block:
    role: str  # "c" integral, "h" comparison, "w" form, "z" integral tail
    weight: int
    deg: int  # cochain degree of the block
    size: int

    @property
    def lattice(self) -> bool:
        return self.role in ("c", "z")


class BlockComplex:
    """Z-graded complex of cochain blocks with sparse rational differentials.

    Subclasses provide ``blocks(t)`` and ``entries(t)`` (the differential from
    degree t to t+1 as ``{(row, col): value}``).
    """

    K: SimplicialComplex
    period: int | None = None  # 2 for Z/2-graded complexes

    def blocks(self, t: int) -> list[Block]:
        raise NotImplementedError

    def entries(self, t: int) -> dict:
        raise NotImplementedError

    def rebuild(self, L: SimplicialComplex) -> "BlockComplex":
        """The same construction on a subcomplex (twists restricted)."""
        raise NotImplementedError

    def _norm(self, t: int) -> int:
        return t % self.period if self.period else t

    def dim(self, t: int) -> int:
        return sum(b.size for b in self.blocks(t))

    def offsets(self, t: int) -> dict:
        out, off = {}, 0
        for b in self.blocks(t):
            out[(b.role, b.weight)] = (off, b)
            off += b.size
        return out

    def matrix(self, t: int) -> ExactMatrix:
        key = ("mat", self._norm(t))
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = ExactMatrix.from_sparse(self.entries(t), (self.dim(t + 1), self.dim(t)), "Q")
        return cache[key]

    def ambient(self, t: int) -> Subgroup:
        n = self.dim(t)
        lat, rat, off = [], [], 0
        for b in self.blocks(t):
            (lat if b.lattice else rat).extend(range(off, off + b.size))
            off += b.size
        return Subgroup.mixed(lat, rat, n)

    def check_square_zero(self, t: int = 0) -> bool:
        return (self.matrix(t) @ self.matrix(t - 1)).is_zero()

    def cocycles(self, t: int) -> Subgroup:
        return self.ambient(t).kernel(self.matrix(t).q)

    def coboundaries(self, t: int) -> Subgroup:
        return self.ambient(t - 1).image(self.matrix(t - 1).q)

    def cohomology(self, t: int = 0) -> SubQuotient:
        key = ("H", self._norm(t))
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = SubQuotient(self.cocycles(t), self.coboundaries(t), f"H^{t}")
        return cache[key]

    def descriptor(self, t: int = 0) -> DiffCohGroup:
        return self.cohomology(t).descriptor()

    # restriction to subcomplexes
    def restriction_matrix(self, sub: "BlockComplex", t: int) -> ExactMatrix:
        L = sub.K
        mats = []
        tgt = {(b.role, b.weight): b for b in sub.blocks(t)}
        for b in self.blocks(t):
            if (b.role, b.weight) not in tgt:
                raise CompositionMismatch(f"block {b} missing on the subcomplex")
            tb = tgt[(b.role, b.weight)]
            if b.size == 0 or tb.size == 0:
                mats.append(ExactMatrix.zeros(tb.size, b.size, "Q"))
            else:
                mats.append(self.K.restriction(L, b.deg, "Q"))
        if len(tgt) != len(mats):
            raise CompositionMismatch("subcomplex has extra blocks")
        if not mats:
            return ExactMatrix.zeros(0, 0, "Q")
        return block_diag(*mats)

    def vector_of(self, t: int, parts: dict) -> list:
        """Ambient vector from ``{(role, weight): Cochain}`` (missing blocks are zero)."""
        vec = []
        for b in self.blocks(t):
            c = parts.get((b.role, b.weight))
            if c is None or b.size == 0:
                if c is not None and not c.is_zero():
                    raise CompositionMismatch(f"block {b} must vanish")
                vec.extend([0] * b.size)
            else:
                if len(c.values) != b.size:
                    raise CompositionMismatch(f"block {b} expects {b.size} values")
                vec.extend(c.values)
        return vec

    def split_vector(self, t: int, vec) -> dict:
        out, off = {}, 0
        for b in self.blocks(t):
            kind = "Z" if b.lattice and all(Fraction(x).denominator == 1 for x in vec[off:off + b.size]) else "Q"
            if b.size == 0:
                out[(b.role, b.weight)] = Cochain.zero(self.K, b.deg, kind)
                continue
            out[(b.role, b.weight)] = Cochain(self.K, b.deg, tuple(vec[off:off + b.size]), kind)
            off += b.size
        return out


def _add(M: dict, key, v):
    if v:
        nv = M.get(key, 0) + v
        if nv:
            M[key] = nv
        else:
            M.pop(key, None)


def _put_matrix(M: dict, A: ExactMatrix, roff: int, coff: int, scale=1):
    sp = A._sp
    if sp is None:
        for i, row in enumerate(A.entries):
            for j, v in enumerate(row):
                if v:
                    _add(M, (roff + i, coff + j), scale * v)
    else:
        for (i, j), v in sp.items():
            _add(M, (roff + i, coff + j), scale * v)


def _put_identity(M: dict, n: int, roff: int, coff: int, scale=1):
    for i in range(n):
        _add(M, (roff + i, coff + i), scale)


def _sparse_cob(K: SimplicialComplex, deg: int) -> ExactMatrix:
    key = ("spcob", deg)
    if key not in K._cache:
        A = coboundary(K, deg, "Z") if deg >= 0 else ExactMatrix.zeros(K.n_simplices(deg + 1), 0)
        K._cache[key] = ExactMatrix.from_sparse({(i, j): v for i, row in enumerate(A.entries) for j, v in enumerate(row) if v}, A.shape)
    return K._cache[key]


def _cup_left_sparse(a: Cochain, q: int) -> dict:
    """Entries of x -> a cup x from C^q to C^(p+q)."""
    K, p = a.K, a.degree
    out = {}
    n = p + q
    if n > K.dim or q < 0 or p < 0 or a.is_zero():
        return out
    ia, ib = K.index[p], K.index[q]
    for r, s in enumerate(K.simplices[n]):
        x = a.values[ia[s[: p + 1]]]
        if x:
            out[(r, ib[s[p:]])] = x
    return out


class DeligneSum(BlockComplex):
    """Direct sum over weights of shifted Deligne complexes, optionally twisted.

    Degree t holds the weight-w complex in degree w + t for every weight in
    ``weights``, plus the integral tails C^(t + j)(Z) for each negative degree
    j in ``tails``.  With ``twist`` (a weight-(2k+1) cocycle)
    the differential becomes d + (twist cup -) included into weight w + 2k.
    """

    def __init__(self, K: SimplicialComplex, weights, tails=(), twist: DiffCochain | None = None, name: str = ""):
        self.K = K
        self.weights = tuple(sorted(weights))
        self.tails = tuple(tails)
        self.twist = twist
        self.name = name
        if twist is not None:
            if twist.degree != twist.n or twist.n % 2 == 0:
                raise WeightMismatch("a twist is an odd-weight cocycle of degree equal to its weight")
            if twist.K is not K:
                raise WeightMismatch("twist lives on a different complex")

    def rebuild(self, L):
        tw = None
        if self.twist is not None:
            tw = restrict_diff(self.twist, self.K, L)
        return DeligneSum(L, self.weights, self.tails, tw, self.name)

    def blocks(self, t: int) -> list[Block]:
        K = self.K
        out = []
        for w in self.weights:
            m = w + t
            out.append(Block("c", w, m, K.n_simplices(m)))
            out.append(Block("h", w, m - 1, K.n_simplices(m - 1)))
            out.append(Block("w", w, m, K.n_simplices(m) if m >= w else 0))
        for j in self.tails:
            out.append(Block("z", j, t + j, K.n_simplices(t + j)))
        return out

    def entries(self, t: int) -> dict:
        K = self.K
        src = self.offsets(t)
        tgt = self.offsets(t + 1)
        M: dict = {}
        for w in self.weights:
            m = w + t
            oc, bc = src[("c", w)]
            oh, bh = src[("h", w)]
            ow, bw = src[("w", w)]
            tc, _ = tgt[("c", w)]
            th, _ = tgt[("h", w)]
            tw_, btw = tgt[("w", w)]
            if bc.size:
                _put_matrix(M, _sparse_cob(K, m), tc, oc)
                _put_identity(M, bc.size, th, oc, -1)
            if bh.size:
                _put_matrix(M, _sparse_cob(K, m - 1), th, oh, -1)
            if bw.size:
                _put_identity(M, bw.size, th, ow, 1)
                if btw.size:
                    _put_matrix(M, _sparse_cob(K, m), tw_, ow)
        for j in self.tails:
            oz, bz = src[("z", j)]
            tz, btz = tgt[("z", j)]
            if bz.size and btz.size:
                _put_matrix(M, _sparse_cob(K, t + j), tz, oz, -1 if j % 2 else 1)
        if self.twist is not None:
            self._twist_entries(M, t, src, tgt)
        return M

    def _twist_entries(self, M, t, src, tgt):
        tw = self.twist
        q = tw.n  # 2k+1
        sgn = -1  # (-1)^(2k+1) on the c h' term
        for w in self.weights:
            if (("c", w + q - 1)) not in tgt:
                continue  # target weight outside the truncation
            m = w + t
            oc, bc = src[("c", w)]
            oh, bh = src[("h", w)]
            ow, bw = src[("w", w)]
            tc, btc = tgt[("c", w + q - 1)]
            th, bth = tgt[("h", w + q - 1)]
            tw_, btw = tgt[("w", w + q - 1)]
            if bc.size and btc.size:
                for (i, j), v in _cup_left_sparse(tw.c, m).items():
                    _add(M, (tc + i, oc + j), v)
            if bh.size and bth.size:
                for (i, j), v in _cup_left_sparse(tw.c, m - 1).items():
                    _add(M, (th + i, oh + j), sgn * v)
            if bw.size and bth.size:
                for (i, j), v in _cup_left_sparse(tw.h, m).items():
                    _add(M, (th + i, ow + j), v)
            if bw.size and btw.size:
                for (i, j), v in _cup_left_sparse(tw.w, m).items():
                    _add(M, (tw_ + i, ow + j), v)


def restrict_cochain(c: Cochain, K: SimplicialComplex, L: SimplicialComplex) -> Cochain:
    R = K.restriction(L, c.degree, "Q")
    vals = [sum((R[i, j] * c.values[j] for j in range(R.cols) if c.values[j]), Fraction(0)) for i in range(R.rows)]
    return Cochain(L, c.degree, tuple(vals), c.kind)


def restrict_diff(x: DiffCochain, K, L) -> DiffCochain:
    return DiffCochain(x.n, restrict_cochain(x.c, K, L), restrict_cochain(x.h, K, L), restrict_cochain(x.w, K, L))


def deligne_complex(K: SimplicialComplex, n: int) -> DeligneSum:
    """The weight-n complex, indexed so that degree 0 is cochain degree n."""
    return DeligneSum(K, [n], name=f"D({n})")


def periodic_weights(K: SimplicialComplex, parity: str, extra: int = 0) -> list[int]:
    """Weights of the given parity up to dim K + 1 (+ extra); higher ones vanish."""
    start = 0 if parity == "ev" else 1
    return list(range(start, K.dim + 2 + extra, 2))


def periodic_tails(K: SimplicialComplex, parity: str) -> list[int]:
    """Negative degrees holding a copy of Z; the block in total degree t is C^(t + j)(Z)."""
    start = 2 if parity == "ev" else 3
    return [-j for j in range(start, K.dim + 4, 2)]


def periodic_complex(K: SimplicialComplex, parity: str, twist: DiffCochain | None = None) -> DeligneSum:
    if parity not in ("ev", "odd"):
        raise ValueError("parity must be 'ev' or 'odd'")
    extra = 1 if twist is not None else 0
    return DeligneSum(K, periodic_weights(K, parity, extra), periodic_tails(K, parity), twist, f"D({parity})")


# --------------------------------------------------------------------------
# cohomology


def diff_cohomology(K: SimplicialComplex, n: int) -> DiffCohGroup:
    """Degree-n cohomology of the weight-n complex, as a subquotient."""
    if n < 0:
        raise ValueError("weight must be >= 0")
    return deligne_complex(K, n).descriptor(0)


def diff_cohomology_closed_form(K: SimplicialComplex, n: int) -> DiffCohGroup:
    """Same group assembled from the two divisible/integral pieces of the sequence

    0 -> C^(n-1)(Q) / (Z^(n-1)(Z) + B^(n-1)(Q)) -> H -> H^n(K; Z) -> 0,

    whose kernel is Q^rank(delta_(n-1)) + (Q/Z)^b_(n-1) and therefore splits.
    """
    rk = coboundary(K, n - 1, "Q").rank() if n >= 1 else 0
    b_prev = betti(K, n - 1) if n >= 1 else 0
    return DiffCohGroup(rk, b_prev, betti(K, n), torsion(K, n))


def periodic_deligne_split(K: SimplicialComplex, parity: str) -> DiffCohGroup:
    total = DiffCohGroup()
    for w in periodic_weights(K, parity):
        total = total + diff_cohomology_closed_form(K, w)
    return total


def periodic_deligne_direct(K: SimplicialComplex, parity: str) -> DiffCohGroup:
    return periodic_complex(K, parity).descriptor(0)


# --------------------------------------------------------------------------
# the diamond


def _full(n):
    return Subgroup.full_space(n)


def _ints(n):
    return Subgroup.integer_points(n)


def _zero(n):
    return Subgroup.zero(n)


def _eye(n):
    return ExactMatrix.identity(n, "Q")


@dataclass
class DiamondData:
    """Groups and maps of the diamond for one weight or one parity."""

    groups: dict
    maps: dict
    label: str = ""
    R_image: Subgroup | None = None
    closed_integral: Subgroup | None = None
    closed: Subgroup | None = None
    extras: dict = field(default_factory=dict)


def _weight_diamond(K: SimplicialComplex, n: int) -> DiamondData:
    Nm, Np = K.n_simplices(n - 1), K.n_simplices(n)
    dprev = coboundary(K, n - 2, "Q") if n >= 2 else ExactMatrix.zeros(Nm, 0, "Q")
    dn1 = coboundary(K, n - 1, "Q") if n >= 1 else ExactMatrix.zeros(Np, 0, "Q")
    dn = coboundary(K, n, "Q")
    Bm = _full(dprev.cols).image(dprev.q)  # B^(n-1)(Q)
    Zm = _full(Nm).kernel(dn1.q)  # Z^(n-1)(Q)
    Bn = _full(Nm).image(dn1.q)  # B^n(Q)
    Zn = _full(Np).kernel(dn.q)  # Z^n(Q)
    Zn_int = _ints(Np).kernel(dn.q)
    Bn_int = _ints(Nm).image(dn1.q)
    Zm_int = _ints(Nm).kernel(dn1.q)
    Bm_int = _ints(dprev.cols).image(dprev.q)

    C = deligne_complex(K, n)
    hat = C.cohomology(0)
    hat.label = f"H^{n}_hat"
    G = {
        "H_R_prev": SubQuotient(Zm, Bm, f"H^{n-1}(Q)"),
        "forms_mod_exact": SubQuotient(_full(Nm), Bm, f"C^{n-1}/im"),
        "closed": SubQuotient(Zn, _zero(Np), f"Z^{n}(Q)"),
        "H_R": SubQuotient(Zn, Bn, f"H^{n}(Q)"),
        "H_QZ_prev": SubQuotient(_full(Nm).preimage(dn1.q, _ints(Np)), _ints(Nm) + Bm, f"H^{n-1}(Q/Z)"),
        "H_Z": SubQuotient(Zn_int, Bn_int, f"H^{n}(Z)"),
        "H_Z_prev": SubQuotient(Zm_int, Bm_int, f"H^{n-1}(Z)"),
        "hat": hat,
    }
    # ambient layout of the weight-n complex in degree 0: [c (Np) | h (Nm) | w (Np)]
    a = ExactMatrix([[0] * Nm for _ in range(Np)] + _eye(Nm).entries + dn1.entries, "Q", (2 * Np + Nm, Nm))
    flat = ExactMatrix((-dn1).entries + _eye(Nm).entries + [[0] * Nm for _ in range(Np)], "Q", (2 * Np + Nm, Nm))
    R = ExactMatrix([[0] * (Np + Nm) + row for row in _eye(Np).entries], "Q", (Np, 2 * Np + Nm))
    I = ExactMatrix([row + [0] * (Nm + Np) for row in _eye(Np).entries], "Q", (Np, 2 * Np + Nm))
    M = {
        "a": GroupMap(G["forms_mod_exact"], hat, a, "a"),
        "flat": GroupMap(G["H_QZ_prev"], hat, flat, "flat"),
        "R": GroupMap(hat, G["closed"], R, "R"),
        "I": GroupMap(hat, G["H_Z"], I, "I"),
        "d": GroupMap(G["forms_mod_exact"], G["closed"], dn1, "d"),
        "deRham": GroupMap(G["closed"], G["H_R"], _eye(Np), "deRham"),
        "beta": GroupMap(G["H_QZ_prev"], G["H_Z"], -dn1, "beta"),
        "j": GroupMap(G["H_Z"], G["H_R"], _eye(Np), "j"),
        "incl_R": GroupMap(G["H_R_prev"], G["forms_mod_exact"], _eye(Nm), "H(Q)->C/im"),
        "reduce": GroupMap(G["H_R_prev"], G["H_QZ_prev"], _eye(Nm), "H(Q)->H(Q/Z)"),
        "rham_int": GroupMap(G["H_Z_prev"], G["forms_mod_exact"], _eye(Nm), "H(Z)->C/im"),
    }
    return DiamondData(
        G,
        M,
        f"weight {n}",
        R_image=hat.num.image(R.q),
        closed_integral=Zn_int + Bn,
        closed=Zn,
    )


def _sum_sq(parts: list[SubQuotient], label: str) -> SubQuotient:
    out = parts[0]
    for p in parts[1:]:
        out = out.direct_sum(p)
    out.label = label
    return out


def diamond(K: SimplicialComplex, parity: str | int) -> DiamondData:
    """Diamond for a single weight (int) or the periodic sum over a parity."""
    if isinstance(parity, int):
        return _weight_diamond(K, parity)
    ws = [_weight_diamond(K, w) for w in periodic_weights(K, parity)]
    G = {k: _sum_sq([d.groups[k] for d in ws], k) for k in ws[0].groups}
    M = {}
    for k, m0 in ws[0].maps.items():
        src = next(n for n, g in ws[0].groups.items() if g is m0.source)
        tgt = next(n for n, g in ws[0].groups.items() if g is m0.target)
        M[k] = GroupMap(G[src], G[tgt], block_diag(*[d.maps[k].matrix for d in ws]), k)

    def cat(xs):
        out = xs[0]
        for x in xs[1:]:
            out = out.direct_sum(x)
        return out

    return DiamondData(
        G,
        M,
        parity,
        R_image=cat([d.R_image for d in ws]),
        closed_integral=cat([d.closed_integral for d in ws]),
        closed=cat([d.closed for d in ws]),
    )


def _zero_group(label="0") -> SubQuotient:
    return SubQuotient.zero(0, label)


def _to_zero(G: SubQuotient) -> GroupMap:
    return GroupMap(G, _ZERO, ExactMatrix.zeros(0, G.dim, "Q"), "0")


def _from_zero(G: SubQuotient) -> GroupMap:
    return GroupMap(_ZERO, G, ExactMatrix.zeros(G.dim, 0, "Q"), "0")


_ZERO = SubQuotient.zero(0, "0")


def check_diamond(D: DiamondData) -> ExactnessReport:
    """Exactness at the six inner nodes plus the extended sequence and R's image."""
    M = D.maps
    report = ExactnessReport()
    chains = [
        ("top at C/im", [M["incl_R"], M["d"]]),
        ("top at closed", [M["d"], M["deRham"]]),
        ("bottom at H(Q/Z)", [M["reduce"], M["beta"]]),
        ("bottom at H(Z)", [M["beta"], M["j"]]),
        ("diagonal flat->hat->closed", [M["flat"], M["R"]]),
        ("diagonal forms->hat->H(Z)", [M["a"], M["I"]]),
        ("long sequence", [M["rham_int"], M["a"], M["I"], _to_zero(M["I"].target)]),
    ]
    for label, chain in chains:
        sub = check_exact(chain)
        for j in sub.junctions:
            j.label = f"{label}: {j.label}"
            report.junctions.append(j)
    # well-definedness of every map
    for name, f in M.items():
        if not f.well_defined():
            from .groups import JunctionResult

            report.junctions.append(JunctionResult(-1, f"map {name}", False, None, "not well defined"))
    D.extras["R_image_is_closed_integral"] = D.R_image == D.closed_integral
    D.extras["R_onto_closed"] = D.closed <= D.R_image
    return report


def R_image_report(D: DiamondData) -> dict:
    return {
        "image_equals_integral_period_cocycles": D.R_image == D.closed_integral,
        "onto_all_cocycles": D.closed <= D.R_image,
    }
