"""Twisted periodic complexes: sign, integral and differential twists.

Integral twists h (odd degree) deform the periodic integral cochains to
delta + h cup; differential twists deform the periodic Deligne totals to
D + (h_hat cup -).  Both square to h cup h, so construction is gated on the
cochain-level obstruction.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, lcm

import flint

from .deligne import (
    Block,
    BlockComplex,
    DeligneSum,
    DiffCochain,
    _add,
    _cup_left_sparse,
    _put_matrix,
    _sparse_cob,
    db_cup,
    periodic_complex,
    restrict_cochain,
)
from .groups import (
    DiffCohGroup,
    ExactnessReport,
    FgAbGroup,
    GroupMap,
    Subgroup,
    SubQuotient,
    check_exact,
    cohomology_at,
)
from .linalg import ExactMatrix, complement_projector, to_fraction, hstack, smith_normal_form, solve, vstack
from .simplicial import (
    Cochain,
    NotACocycle,
    SignCocycle,
    SimplicialComplex,
    SpaceParseError,
    cup,
    local_system_complex,
    local_system_coboundary,
)

__all__ = [
    "ObstructionNonzero",
    "BadDecomposition",
    "ParityMismatch",
    "TwistParseError",
    "Twist",
    "TwistedComplex",
    "IntegralTwistedComplex",
    "SignTwistedComplex",
    "ShiftedComplex",
    "top_generator",
    "differential_twist",
    "obstruction",
    "twisted_complex",
    "twisted_periodic_cohomology",
    "twisted_sign_cohomology",
    "twisted_deligne_cohomology",
    "module_action",
    "class_order",
    "parity_shift",
    "intersection",
    "mayer_vietoris_check",
    "mayer_vietoris_differential",
    "trivializing_cochain",
    "named_twist",
    "mixed_solve",
    "untwist_integral",
    "untwist_differential",
    "UntwistReport",
    "parse_twist",
    "load_twist",
]


class ObstructionNonzero(ValueError):
    def __init__(self, msg: str, certificate=None):
        super().__init__(msg)
        self.certificate = certificate


class BadDecomposition(ValueError):
    pass


class ParityMismatch(ValueError):
    pass


class TwistParseError(SpaceParseError):
    pass


# --------------------------------------------------------------------------
# twists


@dataclass(frozen=True)
class Twist:
    kind: str  # "sign" | "integral" | "differential"
    K: SimplicialComplex
    degree: int
    sign: SignCocycle | None = None
    cochain: Cochain | None = None
    diff: DiffCochain | None = None

    def __post_init__(self):
        if self.kind == "sign":
            if self.degree != 1 or self.sign is None:
                raise ValueError("a sign twist is a degree-one SignCocycle")
        elif self.kind == "integral":
            c = self.cochain
            if c is None or c.degree != self.degree or self.degree % 2 == 0:
                raise ValueError("an integral twist is an odd-degree integer cochain")
            if c.kind != "Z":
                raise ValueError("integral twist must have integer coefficients")
            bad = _first_nonzero(c.coboundary())
            if bad is not None:
                raise NotACocycle(f"delta h is nonzero on {bad}")
        elif self.kind == "differential":
            x = self.diff
            if x is None or x.n != self.degree or x.degree != self.degree or self.degree % 2 == 0:
                raise ValueError("a differential twist is an odd-weight triple of degree equal to its weight")
            dx = x.d()
            for part, name in ((dx.c, "c"), (dx.h, "h"), (dx.w, "w")):
                bad = _first_nonzero(part)
                if bad is not None:
                    raise NotACocycle(f"the {name} component of D(h_hat) is nonzero on {bad}")
        else:
            raise ValueError(f"unknown twist kind {self.kind!r}")

    @classmethod
    def from_sign(cls, eps: SignCocycle) -> "Twist":
        return cls("sign", eps.K, 1, sign=eps)

    @classmethod
    def integral(cls, c: Cochain) -> "Twist":
        return cls("integral", c.K, c.degree, cochain=c)

    @classmethod
    def differential(cls, x: DiffCochain) -> "Twist":
        return cls("differential", x.K, x.n, diff=x)

    @property
    def underlying(self) -> Cochain:
        if self.kind == "integral":
            return self.cochain
        if self.kind == "differential":
            return self.diff.c
        raise ValueError("a sign twist has no integral cochain")

    def is_zero(self) -> bool:
        if self.kind == "sign":
            return self.sign.is_trivial()
        if self.kind == "integral":
            return self.cochain.is_zero()
        return self.diff.is_zero()

    def restrict(self, L: SimplicialComplex) -> "Twist":
        K = self.K
        if self.kind == "sign":
            vals = {L.labels(e): self.sign.eps(*(K.position(v) for v in L.labels(e))) for e in L.simplices[1]} if L.dim >= 1 else {}
            return Twist.from_sign(SignCocycle(L, vals))
        if self.kind == "integral":
            return Twist.integral(restrict_cochain(self.cochain, K, L))
        x = self.diff
        return Twist.differential(
            DiffCochain(x.n, restrict_cochain(x.c, K, L), restrict_cochain(x.h, K, L), restrict_cochain(x.w, K, L))
        )

    def __str__(self) -> str:
        if self.kind == "sign":
            return f"sign twist on {self.K.name}"
        return f"{self.kind} twist of degree {self.degree} on {self.K.name}: {self.underlying.to_dict()}"


def _first_nonzero(c: Cochain):
    for i, v in enumerate(c.values):
        if v:
            return c.K.labels(c.K.simplices[c.degree][i])
    return None


def top_generator(K: SimplicialComplex, degree: int | None = None, scale: int = 1) -> Cochain:
    """``scale`` times the indicator of the last simplex of top degree.

    On a triangulated sphere this represents ``scale`` times a generator of the
    top integral cohomology.
    """
    d = K.dim if degree is None else degree
    vals = [0] * K.n_simplices(d)
    if not vals:
        return Cochain.zero(K, d)
    vals[-1] = scale
    return Cochain(K, d, tuple(vals), "Z")


def differential_twist(c: Cochain, eta: Cochain | None = None) -> DiffCochain:
    """The cocycle (c, eta, c + delta eta) over an integral cocycle c."""
    K, m = c.K, c.degree
    eta = Cochain.zero(K, m - 1, "Q") if eta is None else eta.as_kind("Q")
    return DiffCochain(m, c, eta, c.as_kind("Q") + eta.coboundary())


def obstruction(tw: Twist):
    if tw.kind == "sign":
        raise ValueError("sign twists have no cup-square obstruction")
    if tw.kind == "integral":
        return cup(tw.cochain, tw.cochain)
    return db_cup(tw.diff, tw.diff)


def _gate(tw: Twist):
    ob = obstruction(tw)
    if not ob.is_zero():
        raise ObstructionNonzero(f"h cup h is nonzero for {tw}", ob)


# --------------------------------------------------------------------------
# Z/2-graded complexes


class TwistedComplex(BlockComplex):
    """Periodic cochains C^ev + C^odd with a twisted differential.

    Degree t collects the cochain degrees congruent to t (mod 2).
    """

    period = 2

    def __init__(self, K: SimplicialComplex, twist: Twist | None = None, certify: bool = True, top: int | None = None):
        self.K = K
        self.twist = twist
        self.top = K.dim if top is None else top
        if certify and not (self.check_square_zero(0) and self.check_square_zero(1)):
            raise ObstructionNonzero(f"the twisted differential does not square to zero on {K.name}")

    def blocks(self, t: int) -> list[Block]:
        par = t % 2
        return [Block("c", j, j, self.K.n_simplices(j)) for j in range(par, self.top + 1, 2)]

    def cohomology_pair(self) -> tuple[FgAbGroup, FgAbGroup]:
        """(ev, odd) by Smith normal form on the integer matrices."""
        ev_in, ev_out = self.matrix(1).as_kind("Z"), self.matrix(0).as_kind("Z")
        return cohomology_at(ev_in, ev_out), cohomology_at(ev_out, ev_in)


class IntegralTwistedComplex(TwistedComplex):
    def __init__(self, K, twist: Twist | None = None, certify: bool = True, top: int | None = None):
        if twist is not None and twist.kind != "integral":
            raise ValueError("integral complex needs an integral twist")
        super().__init__(K, twist, certify, top)

    def rebuild(self, L):
        return IntegralTwistedComplex(L, None if self.twist is None else self.twist.restrict(L), top=self.top)

    def entries(self, t: int) -> dict:
        K = self.K
        src, tgt = self.offsets(t), self.offsets(t + 1)
        M: dict = {}
        for j in range(t % 2, self.top + 1, 2):
            oj, bj = src[("c", j)]
            if ("c", j + 1) in tgt and bj.size:
                _put_matrix(M, _sparse_cob(K, j), tgt[("c", j + 1)][0], oj)
            if self.twist is not None and bj.size:
                q = self.twist.degree
                if ("c", j + q) in tgt:
                    for (r, s), v in _cup_left_sparse(self.twist.cochain, j).items():
                        _add(M, (tgt[("c", j + q)][0] + r, oj + s), v)
        return M


class SignTwistedComplex(TwistedComplex):
    def __init__(self, K, twist: Twist, certify: bool = True, top: int | None = None):
        if twist.kind != "sign":
            raise ValueError("sign complex needs a sign twist")
        super().__init__(K, twist, certify, top)

    def rebuild(self, L):
        return SignTwistedComplex(L, self.twist.restrict(L), top=self.top)

    def entries(self, t: int) -> dict:
        K = self.K
        src, tgt = self.offsets(t), self.offsets(t + 1)
        M: dict = {}
        for j in range(t % 2, min(K.dim, self.top), 2):
            A = local_system_coboundary(K, self.twist.sign, j)
            _put_matrix(M, A, tgt[("c", j + 1)][0], src[("c", j)][0])
        return M


class ShiftedComplex(BlockComplex):
    """Degree t of the result is degree t + 1 of ``inner`` (differential negated)."""

    def __init__(self, inner: BlockComplex):
        self.inner = inner
        self.K = inner.K
        self.period = inner.period

    def rebuild(self, L):
        return ShiftedComplex(self.inner.rebuild(L))

    def blocks(self, t: int) -> list[Block]:
        return self.inner.blocks(t + 1)

    def entries(self, t: int) -> dict:
        return {k: -v for k, v in self.inner.entries(t + 1).items()}

    def cohomology_pair(self):
        if hasattr(self.inner, "cohomology_pair"):
            ev, odd = self.inner.cohomology_pair()
            return odd, ev
        return self.descriptor(0), self.descriptor(1)


def parity_shift(T: BlockComplex) -> BlockComplex:
    if isinstance(T, ShiftedComplex) and T.period == 2:
        return T.inner
    return ShiftedComplex(T)


def twisted_complex(K: SimplicialComplex, tw: Twist | None, parity: str = "ev") -> BlockComplex:
    """Total complex for a twist; ``parity`` only matters for differential twists."""
    if tw is None:
        return IntegralTwistedComplex(K)
    if tw.K is not K:
        raise ValueError("twist lives on a different complex")
    if tw.kind == "sign":
        return SignTwistedComplex(K, tw)
    _gate(tw)
    if tw.kind == "integral":
        return IntegralTwistedComplex(K, tw)
    C = periodic_complex(K, parity, tw.diff)
    for t in (-1, 0, 1):
        if not C.check_square_zero(t):
            raise ObstructionNonzero("twisted Deligne differential does not square to zero", obstruction(tw))
    return C


def twisted_periodic_cohomology(K: SimplicialComplex, tw: Twist | None) -> tuple[FgAbGroup, FgAbGroup]:
    if tw is not None and tw.kind != "integral":
        raise ValueError("expected an integral twist")
    return twisted_complex(K, tw).cohomology_pair()


def twisted_sign_cohomology(K: SimplicialComplex, eps: SignCocycle) -> tuple[FgAbGroup, FgAbGroup]:
    """Fold of the local-system cohomology into even and odd degrees."""
    groups = local_system_complex(K, eps).all_cohomology()
    ev, odd = FgAbGroup(), FgAbGroup()
    for p, g in enumerate(groups):
        if p % 2:
            odd = odd + g
        else:
            ev = ev + g
    return ev, odd


def twisted_deligne_cohomology(K: SimplicialComplex, tw: Twist | None) -> tuple[DiffCohGroup, DiffCohGroup]:
    if tw is not None and tw.kind != "differential":
        raise ValueError("expected a differential twist")
    out = []
    for par in ("ev", "odd"):
        C = twisted_complex(K, tw, par) if tw is not None else periodic_complex(K, par)
        out.append(C.descriptor(0))
    return tuple(out)


# --------------------------------------------------------------------------
# module structure


def _periodic_vector(C: BlockComplex, t: int, parts: dict) -> list:
    return C.vector_of(t, {("c", d): c for d, c in parts.items()})


def module_action(C: TwistedComplex, x: dict, u: dict) -> dict:
    """Right action of untwisted periodic cochains ``u`` on twisted ``x``.

    Both are dicts ``{degree: Cochain}``.  The result x cup u is checked to
    be closed under the twisted differential whenever x is twisted-closed and
    u is closed.
    """
    K = C.K
    out: dict = {}
    px = {d % 2 for d, c in x.items() if not c.is_zero()}
    pu = {d % 2 for d, c in u.items() if not c.is_zero()}
    if len(px) > 1 or len(pu) > 1:
        raise ParityMismatch("mixed parities in a periodic cochain")
    for a, ca in x.items():
        for b, cb in u.items():
            if a + b > K.dim:
                continue
            prod = cup(ca, cb)
            out[a + b] = out[a + b] + prod if a + b in out else prod
    par = (next(iter(px), 0) + next(iter(pu), 0)) % 2
    if _is_closed(C, par, x) and all(c.coboundary().is_zero() for c in u.values()):
        if not _is_closed(C, par, out):
            raise ParityMismatch("module action produced a non-closed cochain")
    return out


def _is_closed(C: BlockComplex, t: int, parts: dict) -> bool:
    v = _periodic_vector(C, t, parts)
    return all(x == 0 for x in _apply(C.matrix(t), v))


def _apply(M: ExactMatrix, v) -> list:
    if M._sp is not None:
        out = [Fraction(0)] * M.rows
        for (i, j), a in M._sp.items():
            if v[j]:
                out[i] += a * v[j]
        return out
    return [sum((M[i, j] * v[j] for j in range(M.cols)), Fraction(0)) for i in range(M.rows)]


def class_order(C: BlockComplex, t: int, vec) -> int | None:
    """Order of the class of a cocycle vector (None for infinite order)."""
    B = C.coboundaries(t)
    if not C.cocycles(t).contains_vector(vec):
        raise NotACocycle("vector is not a cocycle")
    if B.contains_vector(vec):
        return 1
    # order divides the exponent of the torsion of the quotient
    fg = C.cohomology(t).fg()
    bound = 1
    for f in fg.invariant_factors:
        bound = max(bound, f)
    for n in range(2, bound + 1):
        if B.contains_vector([n * Fraction(x) for x in vec]):
            return n
    return None


# --------------------------------------------------------------------------
# Mayer-Vietoris


def _label_sets(K: SimplicialComplex) -> set:
    return {frozenset(K.labels(s)) for d in range(K.dim + 1) for s in K.simplices[d]}


def intersection(K: SimplicialComplex, U: SimplicialComplex, V: SimplicialComplex) -> SimplicialComplex:
    common = _label_sets(U) & _label_sets(V)
    maximal = [s for s in common if not any(s < t for t in common)]
    facets = [tuple(sorted(K.position(v) for v in s)) for s in maximal]
    return K.subcomplex(sorted(facets), f"{U.name}&{V.name}")


def _direct_sum_map(f: ExactMatrix, g: ExactMatrix) -> ExactMatrix:
    return vstack(f, g)


def mayer_vietoris_check(K: SimplicialComplex, U: SimplicialComplex, V: SimplicialComplex, tw: Twist | None = None) -> ExactnessReport:
    """Exactness of the Mayer-Vietoris sequence of the (twisted) total complexes.

    Integral and sign twists give the cyclic six-term sequence in degrees
    0, 1.  Differential twists (or ``tw = None`` with ``differential=True``
    via :func:`mayer_vietoris_differential`) give the linear sequence through
    degrees -1, 0, 1, whose outer rows are the flat (Q/Z) groups.
    """
    if _label_sets(U) | _label_sets(V) != _label_sets(K):
        raise BadDecomposition("U and V do not cover K")
    if tw is not None and tw.kind == "differential":
        return mayer_vietoris_differential(K, U, V, tw)
    W = intersection(K, U, V)
    CK = twisted_complex(K, tw)
    CU, CV, CW = CK.rebuild(U), CK.rebuild(V), CK.rebuild(W)
    return _mv_sequence(K, U, V, W, CK, CU, CV, CW, [0, 1], cyclic=True)


def mayer_vietoris_differential(K, U, V, tw: Twist | None = None, parity: str = "ev") -> ExactnessReport:
    if _label_sets(U) | _label_sets(V) != _label_sets(K):
        raise BadDecomposition("U and V do not cover K")
    W = intersection(K, U, V)
    CK = twisted_complex(K, tw, parity) if tw is not None else periodic_complex(K, parity)
    CU, CV, CW = CK.rebuild(U), CK.rebuild(V), CK.rebuild(W)
    return _mv_sequence(K, U, V, W, CK, CU, CV, CW, [-1, 0, 1], cyclic=False)


def _mv_sequence(K, U, V, W, CK, CU, CV, CW, degrees, cyclic) -> ExactnessReport:
    chain = []
    HK = {t: CK.cohomology(t) for t in degrees + [degrees[-1] + 1]}
    HUV = {}
    HW = {}
    for t in degrees:
        HU, HV = CU.cohomology(t), CV.cohomology(t)
        HUV[t] = HU.direct_sum(HV)
        HUV[t].label = f"H^{t}(U)+H^{t}(V)"
        HW[t] = CW.cohomology(t)
        HW[t].label = f"H^{t}(U&V)"
        HK[t].label = f"H^{t}(K)"
    for i, t in enumerate(degrees):
        rU, rV = CK.restriction_matrix(CU, t), CK.restriction_matrix(CV, t)
        sU, sV = CU.restriction_matrix(CW, t), CV.restriction_matrix(CW, t)
        chain.append(GroupMap(HK[t], HUV[t], vstack(rU, rV), f"r{t}"))
        chain.append(GroupMap(HUV[t], HW[t], hstack(sU, -sV), f"s{t}"))
        nxt = degrees[(i + 1) % len(degrees)] if cyclic else t + 1
        if not cyclic and i == len(degrees) - 1:
            break
        E_UW = CU.restriction_matrix(CW, t).T
        E_KU = CK.restriction_matrix(CU, t + 1).T
        conn = E_KU @ CU.matrix(t) @ E_UW
        chain.append(GroupMap(HW[t], HK[nxt], conn, f"connecting{t}"))
    return check_exact(chain, cyclic=cyclic)


# --------------------------------------------------------------------------
# untwisting by a trivializing cochain


def mixed_solve(ambient: Subgroup, M: ExactMatrix, y) -> list | None:
    """A vector x in ``ambient`` (lattice + subspace) with ``M x = y``, or None."""
    L, V = ambient.generators()
    L = [[to_fraction(x) for x in v] for v in L]
    V = [[to_fraction(x) for x in v] for v in V]
    n = ambient.dim
    Mq = M.q
    y = [Fraction(v) for v in y]

    def img(vecs):
        return [[sum((to_fraction(Mq[i, j]) * v[j] for j in range(n) if v[j]), Fraction(0)) for i in range(M.rows)] for v in vecs]

    AL, AV = img(L), img(V)
    m = M.rows
    if AV:
        W = flint.fmpq_mat(len(AV), m, [flint.fmpq(x.numerator, x.denominator) for r in AV for x in r])
        P = complement_projector(W, m)
    else:
        P = flint.fmpq_mat(m, m, [flint.fmpq(int(i == j)) for i in range(m) for j in range(m)])
    k = P.nrows()
    Pr = [[to_fraction(P[i, j]) for j in range(m)] for i in range(k)]
    A = [[sum((Pr[i][r] * AL[c][r] for r in range(m)), Fraction(0)) for c in range(len(AL))] for i in range(k)]
    b = [sum((Pr[i][r] * y[r] for r in range(m)), Fraction(0)) for i in range(k)]
    den = 1
    for row in A + [b]:
        for x in row:
            den = lcm(den, x.denominator)
    Ai = ExactMatrix([[int(x * den) for x in row] for row in A], "Z", (k, len(AL)))
    bi = [int(x * den) for x in b]
    a = [0] * len(AL)
    if len(AL) and k:
        S, Us, Vs = smith_normal_form(Ai)
        z = [sum(Us[i, j] * bi[j] for j in range(k)) for i in range(k)]
        w = [0] * len(AL)
        for i in range(k):
            s = S[i, i] if i < len(AL) else 0
            if s == 0:
                if z[i] != 0:
                    return None
            else:
                if z[i] % s:
                    return None
                w[i] = z[i] // s
        a = [sum(Vs[i, j] * w[j] for j in range(len(AL))) for i in range(len(AL))]
    elif any(bi):
        return None
    x = [sum((a[i] * L[i][j] for i in range(len(L))), Fraction(0)) for j in range(n)]
    resid = [y[i] - sum((to_fraction(Mq[i, j]) * x[j] for j in range(n) if x[j]), Fraction(0)) for i in range(m)]
    if V:
        AVt = ExactMatrix([[AV[c][r] for c in range(len(AV))] for r in range(m)], "Q", (m, len(AV)))
        coeff = solve(AVt, resid)
        if coeff is None:
            return None
        coeff = [to_fraction(c) for c in coeff]
        x = [x[j] + sum((coeff[i] * V[i][j] for i in range(len(V))), Fraction(0)) for j in range(n)]
    elif any(resid):
        return None
    return x


@dataclass
class UntwistReport:
    intertwines: bool
    descriptors_equal: bool
    method: str
    descriptors: tuple = ()
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.descriptors_equal


def _left_mult_matrix_integral(K, b: Cochain, t: int, C: TwistedComplex) -> ExactMatrix:
    src, tgt = C.offsets(t), C.offsets(t + b.degree)
    M: dict = {}
    for j in range(t % 2, C.top + 1, 2):
        if ("c", j + b.degree) in tgt:
            for (r, s), v in _cup_left_sparse(b, j).items():
                _add(M, (tgt[("c", j + b.degree)][0] + r, src[("c", j)][0] + s), v)
    return ExactMatrix.from_sparse(M, (C.dim(t + b.degree), C.dim(t)), "Q")


def _exp_operator(N: ExactMatrix, sign: int = -1) -> ExactMatrix:
    """sum_j (sign N)^j / j! for nilpotent N."""
    n = N.rows
    out = ExactMatrix.identity(n, "Q")
    P = ExactMatrix.identity(n, "Q")
    j = 0
    while True:
        j += 1
        P = (P @ N).scale(sign)
        if P.is_zero():
            return out
        out = out + P.scale(Fraction(1, factorial(j)))
        if j > n + 1:
            raise ValueError("operator is not nilpotent")


def untwist_integral(K: SimplicialComplex, h: Cochain, b: Cochain) -> UntwistReport:
    """Compare the twists h and h' = h + delta b via exp(-b cup)."""
    h2 = h + b.coboundary()
    T1 = twisted_complex(K, Twist.integral(h))
    T2 = twisted_complex(K, Twist.integral(h2))
    ok = True
    notes = []
    for t in (0, 1):
        Phi0 = _exp_operator(_left_mult_matrix_integral(K, b.as_kind("Q"), t, T1))
        Phi1 = _exp_operator(_left_mult_matrix_integral(K, b.as_kind("Q"), t + 1, T1))
        if not (T2.matrix(t) @ Phi0 == Phi1 @ T1.matrix(t)):
            ok = False
            notes.append(f"exp(-b) fails to intertwine in degree {t}")
    d1, d2 = T1.cohomology_pair(), T2.cohomology_pair()
    return UntwistReport(ok, d1 == d2, "chain isomorphism" if ok else "recomputation", (d1, d2), notes)


def _left_mult_matrix_deligne(C: DeligneSum, beta: DiffCochain, t: int) -> ExactMatrix:
    """x -> beta . x for beta of weight 2k+1 and degree 2k, landing in weight w + 2k."""
    q = beta.n
    m0 = beta.degree
    sgn = -1 if m0 % 2 else 1
    src, tgt = C.offsets(t), C.offsets(t)
    M: dict = {}
    for w in C.weights:
        tw = w + q - 1
        if ("c", tw) not in tgt:
            continue
        m = w + t
        oc, bc = src[("c", w)]
        oh, bh = src[("h", w)]
        ow, bw = src[("w", w)]
        tc, btc = tgt[("c", tw)]
        th, bth = tgt[("h", tw)]
        tw_, btw = tgt[("w", tw)]
        if bc.size and btc.size:
            for (i, j), v in _cup_left_sparse(beta.c, m).items():
                _add(M, (tc + i, oc + j), v)
        if bh.size and bth.size:
            for (i, j), v in _cup_left_sparse(beta.c, m - 1).items():
                _add(M, (th + i, oh + j), sgn * v)
        if bw.size and bth.size:
            for (i, j), v in _cup_left_sparse(beta.h, m).items():
                _add(M, (th + i, ow + j), v)
        if bw.size and btw.size:
            for (i, j), v in _cup_left_sparse(beta.w, m).items():
                _add(M, (tw_ + i, ow + j), v)
    return ExactMatrix.from_sparse(M, (C.dim(t), C.dim(t)), "Q")


def trivializing_cochain(tw: Twist) -> DiffCochain | None:
    """beta of weight 2k+1, degree 2k with D beta = h_hat, if one exists."""
    from .deligne import deligne_complex

    x = tw.diff
    K = x.K
    C = deligne_complex(K, x.n)
    sol = mixed_solve(C.ambient(-1), C.matrix(-1), x.vector())
    if sol is None:
        return None
    parts = C.split_vector(-1, sol)
    c = parts[("c", x.n)].as_kind("Z")
    return DiffCochain(x.n, c, parts[("h", x.n)].as_kind("Q"), parts[("w", x.n)].as_kind("Q"))


def untwist_differential(K: SimplicialComplex, tw: Twist, beta: DiffCochain | None = None) -> UntwistReport:
    """Compare D + h_hat with the untwisted D using exp(-beta .) for D beta = h_hat."""
    if beta is None:
        beta = trivializing_cochain(tw)
        if beta is None:
            raise ObstructionNonzero("the underlying twist is not topologically trivial")
    if not (beta.d() - tw.diff).is_zero():
        raise NotACocycle("D(beta) differs from the twist")
    notes = [f"trivializing cochain: {beta}"]
    ok = True
    descs = []
    for par in ("ev", "odd"):
        T = twisted_complex(K, tw, par)
        U = DeligneSum(K, T.weights, T.tails, None, T.name)
        for t in (-1, 0):
            P0 = _exp_operator(_left_mult_matrix_deligne(U, beta, t))
            P1 = _exp_operator(_left_mult_matrix_deligne(U, beta, t + 1))
            if not (T.matrix(t) @ P0 == P1 @ U.matrix(t)):
                ok = False
                notes.append(f"{par}: exp(-beta) fails to intertwine in degree {t}")
            if any(Fraction(v).denominator != 1 for v in (P0._sp or {}).values()):
                ok = False
                notes.append(f"{par}: exp(-beta) is not integral")
        descs.append((U.descriptor(0), T.descriptor(0)))
    equal = all(a == b for a, b in descs)
    return UntwistReport(ok, equal, "chain isomorphism" if ok else "recomputation", tuple(descs), notes)


# --------------------------------------------------------------------------
# twist files


_RATIONAL = re.compile(r"-?\d+\s*/\s*\d+")


def _parse_map(K: SimplicialComplex, degree: int, text: str, line: int, kind: str) -> Cochain:
    body = text.strip()
    if kind == "Q":
        # bare rationals such as 1/2 are read as quoted Fractions
        body = _RATIONAL.sub(lambda m: repr(m.group(0)), body)
    try:
        raw = ast.literal_eval(body)
    except (ValueError, SyntaxError) as e:
        raise TwistParseError(f"cannot read cochain map: {e}", line) from None
    if not isinstance(raw, dict):
        raise TwistParseError("cochain must be a {simplex: coefficient} map", line)
    coeffs = {}
    for s, v in raw.items():
        key = s if isinstance(s, tuple) else (s,)
        if len(key) != degree + 1:
            raise TwistParseError(f"simplex {s!r} has the wrong dimension for degree {degree}", line)
        try:
            pos = tuple(sorted(K.position(x) for x in key))
        except KeyError:
            raise TwistParseError(f"simplex {s!r} names an unknown vertex", line) from None
        if not K.has_simplex(pos) or len(set(pos)) != len(pos):
            raise TwistParseError(f"{s!r} is not a simplex of {K.name}", line)
        if isinstance(v, str):
            v = Fraction(v)
        coeffs[key] = v
    try:
        return Cochain.from_dict(K, degree, coeffs, kind)
    except (TypeError, ValueError) as e:
        raise TwistParseError(str(e), line) from None


_NAMED = {"h": "integral", "hhat": "differential"}


def named_twist(name: str, K: SimplicialComplex) -> Twist | None:
    """Corpus names ``h<deg>_scale<n>`` and ``hhat<deg>_scale<n>`` on the top simplex."""

    m = re.fullmatch(r"(hhat|h)(\d+)_scale(-?\d+)", name.strip())
    if not m:
        return None
    kind, deg, n = _NAMED[m.group(1)], int(m.group(2)), int(m.group(3))
    c = top_generator(K, deg, n)
    return Twist.integral(c) if kind == "integral" else Twist.differential(differential_twist(c))


def parse_twist(text: str, K: SimplicialComplex) -> Twist:
    fields: dict = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise TwistParseError(f"expected 'key: value', got {line!r}", no)
        key, val = line.split(":", 1)
        key = key.strip().lower()
        if key in fields:
            raise TwistParseError(f"duplicate key {key!r}", no)
        fields[key] = (val.strip(), no)
    if "kind" not in fields:
        raise TwistParseError("missing 'kind'", 1)
    kind, kline = fields["kind"]
    if kind == "sign":
        text, no = fields.get("eps", ("{}", kline))
        try:
            raw = ast.literal_eval(text)
        except (ValueError, SyntaxError) as e:
            raise TwistParseError(f"cannot read sign map: {e}", no) from None
        try:
            return Twist.from_sign(SignCocycle(K, raw))
        except NotACocycle as e:
            raise TwistParseError(str(e), no) from None
    if kind not in ("integral", "differential"):
        raise TwistParseError(f"unknown kind {kind!r}", kline)
    if "degree" not in fields:
        raise TwistParseError("missing 'degree'", kline)
    try:
        degree = int(fields["degree"][0])
    except ValueError:
        raise TwistParseError("degree must be an integer", fields["degree"][1]) from None
    if degree % 2 == 0 or degree < 1:
        raise TwistParseError("twist degree must be odd and positive", fields["degree"][1])
    ctext, cline = fields.get("c", ("{}", kline))
    c = _parse_map(K, degree, ctext, cline, "Z")
    try:
        if kind == "integral":
            return Twist.integral(c)
        eta = _parse_map(K, degree - 1, *fields.get("eta", ("{}", kline)), "Q") if degree >= 1 else None
        if "omega" in fields:
            om = _parse_map(K, degree, *fields["omega"], "Q")
        else:
            om = c.as_kind("Q") + eta.coboundary()
        return Twist.differential(DiffCochain(degree, c, eta, om))
    except NotACocycle as e:
        raise TwistParseError(str(e), cline) from None


def load_twist(spec: str, K: SimplicialComplex) -> Twist:
    """A corpus name, an inline twist description or a path to a twist file."""
    import os

    tw = named_twist(spec, K)
    if tw is not None:
        return tw
    if "\n" in spec or spec.lstrip().startswith("kind"):
        return parse_twist(spec, K)
    path = spec
    if not os.path.exists(path):
        from importlib.resources import files

        cand = files("deligne_lab").joinpath("data", "twists", f"{spec}.twist")
        if cand.is_file():
            return parse_twist(cand.read_text(), K)
        raise TwistParseError(f"no twist named {spec!r}", None)
    with open(path) as fh:
        return parse_twist(fh.read(), K)
