"""Abelian group descriptors, mixed subgroups of Q^N, exactness and extensions.

Every group this package handles is (up to isomorphism) of the form

    Q^v  +  (Q/Z)^t  +  Z^l  +  Z/f_1 + ... + Z/f_r

and every concrete group is realized as a subquotient ``S / T`` where ``S`` and
``T`` are subgroups of some ambient ``Q^N`` of the shape *lattice + subspace*.
Those are closed under images, sums and preimages, which is all the exactness
machinery needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm, prod

import flint
from sympy import factorint

from .linalg import (
    ExactMatrix,
    _rows,
    complement_projector,
    int_kernel,
    invariant_factors,
    lattice_basis,
    nullspace,
    qmat,
    rank,
    rref,
    solve,
    solve_many,
    sparse_entries,
    sparse_invariant_factors,
    to_fraction,
    zmat,
)

__all__ = [
    "NotAComplex",
    "CompositionMismatch",
    "FgAbGroup",
    "DiffCohGroup",
    "Ambiguous",
    "Subgroup",
    "SubQuotient",
    "GroupMap",
    "ExactnessReport",
    "cohomology_at",
    "check_exact",
    "resolve_extension",
    "extension_candidates",
]


class NotAComplex(ValueError):
    pass


class CompositionMismatch(ValueError):
    pass


def _normalize_factors(factors) -> tuple[int, ...]:
    """Invariant-factor form of a finite group given by any cyclic orders."""
    primes: dict[int, list[int]] = {}
    for f in factors:
        f = abs(int(f))
        if f == 0:
            raise ValueError("zero is not a finite cyclic order")
        for p, e in factorint(f).items():
            primes.setdefault(p, []).append(p**e)
    if not primes:
        return ()
    width = max(len(v) for v in primes.values())
    cols = [1] * width
    for p, powers in primes.items():
        powers.sort()
        for i, q in enumerate(powers):
            cols[width - len(powers) + i] *= q
    return tuple(c for c in cols if c > 1)


@dataclass(frozen=True)
class FgAbGroup:
    """Z^free_rank plus Z/f_1 + ... with f_i | f_{i+1}, every f_i >= 2."""

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant_factors", tuple(int(f) for f in self.invariant_factors))
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        fs = self.invariant_factors
        if any(f < 2 for f in fs) or any(b % a for a, b in zip(fs, fs[1:])):
            raise ValueError(f"not a divisibility chain of factors >= 2: {fs}")

    @classmethod
    def from_orders(cls, free_rank: int = 0, orders=()) -> "FgAbGroup":
        return cls(free_rank, _normalize_factors(o for o in orders if abs(o) != 1))

    @property
    def order_of_torsion(self) -> int:
        return prod(self.invariant_factors)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors

    def __add__(self, other: "FgAbGroup") -> "FgAbGroup":
        return FgAbGroup.from_orders(self.free_rank + other.free_rank, self.invariant_factors + other.invariant_factors)

    def as_diff(self) -> "DiffCohGroup":
        return DiffCohGroup(lattice_rank=self.free_rank, finite_factors=self.invariant_factors)

    def to_dict(self) -> dict:
        return {"free_rank": self.free_rank, "invariant_factors": list(self.invariant_factors)}

    @classmethod
    def from_dict(cls, d: dict) -> "FgAbGroup":
        return cls(d["free_rank"], tuple(d["invariant_factors"]))

    def __str__(self) -> str:
        parts = (["Z^%d" % self.free_rank if self.free_rank > 1 else "Z"] if self.free_rank else [])
        parts += [f"Z/{f}" for f in self.invariant_factors]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class DiffCohGroup:
    """Q^vector_dim + (Q/Z)^torus_rank + Z^lattice_rank + finite part."""

    vector_dim: int = 0
    torus_rank: int = 0
    lattice_rank: int = 0
    finite_factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "finite_factors", tuple(int(f) for f in self.finite_factors))
        if min(self.vector_dim, self.torus_rank, self.lattice_rank) < 0:
            raise ValueError("negative rank")
        fs = self.finite_factors
        if any(f < 2 for f in fs) or any(b % a for a, b in zip(fs, fs[1:])):
            raise ValueError(f"not a divisibility chain of factors >= 2: {fs}")

    @property
    def is_divisible(self) -> bool:
        return self.lattice_rank == 0 and not self.finite_factors

    def is_trivial(self) -> bool:
        return self == DiffCohGroup()

    def __add__(self, other) -> "DiffCohGroup":
        if isinstance(other, FgAbGroup):
            other = other.as_diff()
        return DiffCohGroup(
            self.vector_dim + other.vector_dim,
            self.torus_rank + other.torus_rank,
            self.lattice_rank + other.lattice_rank,
            _normalize_factors(self.finite_factors + other.finite_factors),
        )

    __radd__ = __add__

    def fg_part(self) -> FgAbGroup:
        return FgAbGroup(self.lattice_rank, self.finite_factors)

    def to_dict(self) -> dict:
        return {
            "vector_dim": self.vector_dim,
            "torus_rank": self.torus_rank,
            "lattice_rank": self.lattice_rank,
            "finite_factors": list(self.finite_factors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiffCohGroup":
        return cls(d["vector_dim"], d["torus_rank"], d["lattice_rank"], tuple(d["finite_factors"]))

    def __str__(self) -> str:
        parts = []
        for sym, n in (("Q", self.vector_dim), ("Q/Z", self.torus_rank), ("Z", self.lattice_rank)):
            if n:
                parts.append(sym if n == 1 else f"({sym})^{n}")
        parts += [f"Z/{f}" for f in self.finite_factors]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class Ambiguous:
    """An extension problem the divisibility/freeness levers cannot settle."""

    sub: DiffCohGroup
    quot: FgAbGroup
    candidates: tuple[DiffCohGroup, ...] | None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "ambiguous": True,
            "sub": self.sub.to_dict(),
            "quot": self.quot.to_dict(),
            "candidates": None if self.candidates is None else [c.to_dict() for c in self.candidates],
            "reason": self.reason,
        }


# --------------------------------------------------------------------------
# integral cohomology at one spot


_SPARSE_CUTOFF = 120


def cohomology_at(dprev: ExactMatrix, dthis: ExactMatrix) -> FgAbGroup:
    """``ker(dthis) / im(dprev)``; rational matrices give the dimension as free rank."""
    if dprev.rows != dthis.cols:
        raise ValueError(f"incompatible shapes {dprev.shape}, {dthis.shape}")
    n = dthis.cols
    if not (dthis @ dprev).is_zero():
        raise NotAComplex("dthis @ dprev != 0")
    if dprev.kind == "Q" or dthis.kind == "Q":
        return FgAbGroup(n - dthis.rank() - dprev.rank())
    if max(dprev.shape + dthis.shape) > _SPARSE_CUTOFF:
        r_this = len(sparse_invariant_factors(sparse_entries(dthis), *dthis.shape))
        facs = sparse_invariant_factors(sparse_entries(dprev), *dprev.shape)
    else:
        r_this = dthis.rank()
        facs = invariant_factors(dprev)
    return FgAbGroup.from_orders(n - r_this - len(facs), [f for f in facs if f > 1])


# --------------------------------------------------------------------------
# lattice + subspace subgroups


def _fq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    f = Fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


def _matq(M, ncols: int) -> flint.fmpq_mat:
    if isinstance(M, flint.fmpq_mat):
        return M
    if isinstance(M, flint.fmpz_mat):
        return flint.fmpq_mat(M)
    if isinstance(M, ExactMatrix):
        return M.q
    rows = [list(r) for r in M]
    return qmat(rows, len(rows), ncols)


def _mul(A: flint.fmpq_mat, B: flint.fmpq_mat) -> flint.fmpq_mat:
    if A.nrows() == 0 or B.ncols() == 0 or A.ncols() == 0:
        return flint.fmpq_mat(A.nrows(), B.ncols())
    return A * B


def _apply_rows(M: flint.fmpq_mat, R: flint.fmpq_mat) -> flint.fmpq_mat:
    """Apply matrix M to each row vector of R; returns rows."""
    if R.nrows() == 0:
        return flint.fmpq_mat(0, M.nrows())
    return _mul(M, R.transpose()).transpose() if M.nrows() else flint.fmpq_mat(R.nrows(), 0)


def _vstack_q(A: flint.fmpq_mat, B: flint.fmpq_mat) -> flint.fmpq_mat:
    n = max(A.ncols(), B.ncols())
    rows = _rows(A) + _rows(B)
    return qmat(rows, len(rows), n) if rows else flint.fmpq_mat(0, n)


class Subgroup:
    """``L + V`` inside ``Q^dim`` with ``L`` finitely generated and ``V`` a subspace.

    Stored in normal form: ``V`` as RREF rows, ``L`` as an HNF basis of the
    lattice reduced modulo ``V``.
    """

    __slots__ = ("dim", "space", "lattice")

    def __init__(self, dim: int, lattice=(), space=()):
        self.dim = dim
        V = _matq(space, dim) if not isinstance(space, tuple) or space else flint.fmpq_mat(0, dim)
        L = _matq(lattice, dim) if not isinstance(lattice, tuple) or lattice else flint.fmpq_mat(0, dim)
        self.space, _ = rref(V) if V.nrows() else (flint.fmpq_mat(0, dim), [])
        if L.nrows():
            L = self._reduce(L)
            self.lattice = lattice_basis(L)
        else:
            self.lattice = flint.fmpq_mat(0, dim)

    # construction helpers
    @classmethod
    def zero(cls, dim: int) -> "Subgroup":
        return cls(dim)

    @classmethod
    def full_space(cls, dim: int) -> "Subgroup":
        return cls(dim, space=[[int(i == j) for j in range(dim)] for i in range(dim)])

    @classmethod
    def integer_points(cls, dim: int) -> "Subgroup":
        return cls(dim, lattice=[[int(i == j) for j in range(dim)] for i in range(dim)])

    @classmethod
    def mixed(cls, int_coords, rat_coords, dim: int) -> "Subgroup":
        """Z on the coordinates ``int_coords`` plus Q on ``rat_coords``."""
        L = [[int(i == j) for j in range(dim)] for i in int_coords]
        V = [[int(i == j) for j in range(dim)] for i in rat_coords]
        return cls(dim, lattice=L, space=V)

    def _reduce(self, X: flint.fmpq_mat) -> flint.fmpq_mat:
        """Reduce rows of X modulo the space (zero on the space's pivot columns)."""
        if self.space.nrows() == 0 or X.nrows() == 0:
            return X
        Sr = _rows(self.space)
        piv = [next(j for j, x in enumerate(r) if x != 0) for r in Sr]
        out = []
        for row in _rows(X):
            row = list(row)
            for p, srow in zip(piv, Sr):
                c = row[p]
                if c != 0:
                    row = [a - c * b for a, b in zip(row, srow)]
            out.append(row)
        return qmat(out, len(out), self.dim)

    @property
    def space_dim(self) -> int:
        return self.space.nrows()

    @property
    def lattice_rank(self) -> int:
        return self.lattice.nrows()

    def __repr__(self) -> str:
        return f"Subgroup(dim={self.dim}, lattice_rank={self.lattice_rank}, space_dim={self.space_dim})"

    def generators(self) -> tuple[list, list]:
        return _rows(self.lattice), _rows(self.space)

    # operations
    def __add__(self, other: "Subgroup") -> "Subgroup":
        assert self.dim == other.dim
        return Subgroup(self.dim, _vstack_q(self.lattice, other.lattice), _vstack_q(self.space, other.space))

    def image(self, M) -> "Subgroup":
        """Image under the linear map with matrix ``M`` (target_dim x dim)."""
        M = _matq(M, self.dim)
        if M.ncols() != self.dim:
            raise ValueError("matrix does not act on this ambient space")
        tdim = M.nrows()
        return Subgroup(tdim, _apply_rows(M, self.lattice), _apply_rows(M, self.space))

    def _contains_rows(self, X: flint.fmpq_mat) -> bool:
        """Every row of X lies in the subgroup (one elimination for all rows)."""
        X = self._reduce(X)
        nonzero = [i for i, r in enumerate(_rows(X)) if any(c != 0 for c in r)]
        if not nonzero:
            return True
        r = self.lattice.nrows()
        if r == 0:
            return False
        Xr = _rows(X)
        Lr = _rows(self.lattice)
        k = len(nonzero)
        # the lattice rows are independent, so its columns pivot first
        aug = qmat([[Lr[j][i] for j in range(r)] + [Xr[t][i] for t in nonzero] for i in range(self.dim)], self.dim, r + k)
        R, _ = aug.rref()
        Rr = _rows(R)
        for c in range(r, r + k):
            if any(Rr[i][c] != 0 for i in range(r, self.dim)):
                return False
            if any(Rr[i][c].q != 1 for i in range(r)):
                return False
        return True

    def contains_vector(self, x) -> bool:
        return self._contains_rows(qmat([list(x)], 1, self.dim))

    def __le__(self, other: "Subgroup") -> bool:
        """Containment ``self`` inside ``other``."""
        assert self.dim == other.dim
        if self.space.nrows():
            red = other._reduce(self.space)
            if any(x != 0 for x in red.entries()):
                return False
        return self.lattice.nrows() == 0 or other._contains_rows(self.lattice)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and self.dim == other.dim and self <= other and other <= self

    __hash__ = None

    def preimage(self, M, target: "Subgroup") -> "Subgroup":
        """``{x in self : M x in target}``."""
        M = _matq(M, self.dim)
        tdim = target.dim
        if M.nrows() != tdim or M.ncols() != self.dim:
            raise ValueError("shape mismatch in preimage")
        L, V = self.lattice, self.space
        r, s = L.nrows(), V.nrows()
        P = complement_projector(target.space, tdim)  # kills target space
        A = _mul(P, _mul(M, L.transpose())) if r else flint.fmpq_mat(P.nrows(), 0)
        B = _mul(P, _mul(M, V.transpose())) if s else flint.fmpq_mat(P.nrows(), 0)
        C = _mul(P, target.lattice.transpose()) if target.lattice.nrows() else flint.fmpq_mat(P.nrows(), 0)
        u = C.ncols()
        m = P.nrows()
        # lattice part: integer (a, c) with rho(A a - C c) = 0 where rho kills span B;
        # then x = L a + V b with B b = C c - A a
        rho = complement_projector(B.transpose() if s else flint.fmpq_mat(0, m), m)
        gens = []
        if r + u:
            comb = qmat([list(ra) + [-x for x in rc] for ra, rc in zip(_rows(A), _rows(C))], m, r + u) if m else flint.fmpq_mat(0, r + u)
            if rho.nrows() and m:
                K = int_kernel(_mul(rho, comb))
            else:
                K = zmat([[int(i == j) for j in range(r + u)] for i in range(r + u)])
            if K.nrows():
                Kq = flint.fmpq_mat(K).transpose()  # (r + u) x nk
                resid = _mul(comb, Kq) if m else flint.fmpq_mat(0, Kq.ncols())
                nk = Kq.ncols()
                Ka = qmat(_rows(Kq)[:r], r, nk) if r else flint.fmpq_mat(0, nk)
                X = _mul(L.transpose(), Ka) if r else flint.fmpq_mat(self.dim, nk)
                if s:
                    Bsol = solve_many(B, -resid)
                    assert Bsol is not None
                    X = X + _mul(V.transpose(), Bsol)
                else:
                    assert all(x == 0 for x in resid.entries())
                for col in _rows(X.transpose()):
                    if any(xi != 0 for xi in col):
                        gens.append(col)
        space = flint.fmpq_mat(0, self.dim)
        if s:
            N = nullspace(B) if B.nrows() else qmat([[int(i == j) for j in range(s)] for i in range(s)], s, s)
            space = _mul(N, V)
        return Subgroup(
            self.dim,
            qmat(gens, len(gens), self.dim) if gens else flint.fmpq_mat(0, self.dim),
            space,
        )

    def kernel(self, M) -> "Subgroup":
        M = _matq(M, self.dim)
        return self.preimage(M, Subgroup.zero(M.nrows()))

    def direct_sum(self, other: "Subgroup") -> "Subgroup":
        d = self.dim + other.dim
        L = [list(r) + [0] * other.dim for r in _rows(self.lattice)] + [[0] * self.dim + list(r) for r in _rows(other.lattice)]
        V = [list(r) + [0] * other.dim for r in _rows(self.space)] + [[0] * self.dim + list(r) for r in _rows(other.space)]
        return Subgroup(d, qmat(L, len(L), d) if L else flint.fmpq_mat(0, d), qmat(V, len(V), d) if V else flint.fmpq_mat(0, d))


def quotient_descriptor(S: Subgroup, T: Subgroup) -> DiffCohGroup:
    """Isomorphism type of ``S / T`` (requires ``T <= S``)."""
    if not T <= S:
        raise ValueError("denominator is not contained in numerator")
    n = S.dim
    P = complement_projector(T.space, n)
    SL = _apply_rows(P, S.lattice)
    SV = _apply_rows(P, S.space)
    TL = _apply_rows(P, T.lattice)
    m = P.nrows()
    d = rank(SV) if SV.nrows() else 0
    rho = complement_projector(SV if SV.nrows() else flint.fmpq_mat(0, m), m)
    L1 = lattice_basis(_apply_rows(rho, SL)) if SL.nrows() else flint.fmpq_mat(0, rho.nrows())
    L2gens = _apply_rows(rho, TL) if TL.nrows() else flint.fmpq_mat(0, rho.nrows())
    rank_TL = rank(TL) if TL.nrows() else 0
    rank_L2 = rank(L2gens) if L2gens.nrows() else 0
    torus = rank_TL - rank_L2
    r1 = L1.nrows()
    if r1 == 0:
        return DiffCohGroup(d - torus, torus, 0, ())
    coords = []
    for v in _rows(L2gens):
        c = solve(L1.transpose(), v)
        assert c is not None and all(x.q == 1 for x in c), "T lattice not inside S lattice"
        coords.append([int(x.p) for x in c])
    facs = invariant_factors(zmat(coords, len(coords), r1)) if coords else []
    return DiffCohGroup(d - torus, torus, r1 - len(facs), _normalize_factors(f for f in facs if f > 1))


@dataclass
class SubQuotient:
    """A concrete group ``num / den`` with ``den <= num <= Q^dim``."""

    num: Subgroup
    den: Subgroup
    label: str = ""

    def __post_init__(self):
        if self.num.dim != self.den.dim:
            raise ValueError("numerator and denominator live in different spaces")

    @property
    def dim(self) -> int:
        return self.num.dim

    def descriptor(self) -> DiffCohGroup:
        return quotient_descriptor(self.num, self.den)

    def fg(self) -> FgAbGroup:
        d = self.descriptor()
        if d.vector_dim or d.torus_rank:
            raise ValueError(f"{self.label or 'group'} is not finitely generated: {d}")
        return d.fg_part()

    def is_trivial(self) -> bool:
        return self.num <= self.den

    @classmethod
    def zero(cls, dim: int = 0, label: str = "0") -> "SubQuotient":
        return cls(Subgroup.zero(dim), Subgroup.zero(dim), label)

    @classmethod
    def cyclic(cls, order: int, label: str = "") -> "SubQuotient":
        """Z/order (order 0 means Z) inside Q^1."""
        return cls(Subgroup(1, [[1]]), Subgroup(1, [[order]]) if order else Subgroup.zero(1), label or (f"Z/{order}" if order else "Z"))

    def direct_sum(self, other: "SubQuotient") -> "SubQuotient":
        return SubQuotient(self.num.direct_sum(other.num), self.den.direct_sum(other.den), f"{self.label}+{other.label}")


@dataclass
class GroupMap:
    """A homomorphism of subquotients induced by a rational matrix on ambients."""

    source: SubQuotient
    target: SubQuotient
    matrix: ExactMatrix
    label: str = ""

    def __post_init__(self):
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise CompositionMismatch(
                f"{self.label}: matrix shape {self.matrix.shape} vs ({self.target.dim}, {self.source.dim})"
            )

    def well_defined(self) -> bool:
        M = self.matrix.q
        return self.source.num.image(M) <= self.target.num and self.source.den.image(M) <= self.target.den

    def kernel(self) -> Subgroup:
        return self.source.num.preimage(self.matrix.q, self.target.den)

    def image(self) -> Subgroup:
        return self.source.num.image(self.matrix.q) + self.target.den

    def is_injective(self) -> bool:
        return self.kernel() <= self.source.den

    def is_surjective(self) -> bool:
        return self.target.num <= self.image()

    def then(self, other: "GroupMap") -> "GroupMap":
        return GroupMap(self.source, other.target, other.matrix @ self.matrix, f"{other.label}*{self.label}")


@dataclass
class JunctionResult:
    node: int
    label: str
    ok: bool
    defect: DiffCohGroup | None
    note: str = ""


@dataclass
class ExactnessReport:
    junctions: list[JunctionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(j.ok for j in self.junctions)

    def failures(self) -> list[JunctionResult]:
        return [j for j in self.junctions if not j.ok]

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "junctions": [
                {"node": j.node, "label": j.label, "ok": j.ok, "defect": None if j.defect is None else j.defect.to_dict(), "note": j.note}
                for j in self.junctions
            ],
        }

    def lines(self) -> list[str]:
        return [f"node {j.node} [{j.label}]: {'exact' if j.ok else 'NOT exact'} {j.note}" for j in self.junctions]


def _same_group(a: SubQuotient, b: SubQuotient) -> bool:
    return a is b or (a.dim == b.dim and a.num == b.num and a.den == b.den)


def check_exact(chain: list[GroupMap], cyclic: bool = False) -> ExactnessReport:
    """Check exactness of ``G0 -> G1 -> ... -> Gk``.

    Nodes are numbered 0..k; a map list without an explicit leading or
    trailing zero is checked at interior nodes only (plus the wrap-around node
    when ``cyclic``).  A non-complex junction reports its defect as ``None``.
    """
    for f, g in zip(chain, chain[1:] + (chain[:1] if cyclic else [])):
        if not _same_group(f.target, g.source):
            raise CompositionMismatch(f"target of {f.label or 'map'} is not the source of {g.label or 'map'}")
    report = ExactnessReport()
    pairs = list(zip(chain, chain[1:]))
    if cyclic:
        pairs.append((chain[-1], chain[0]))
    for idx, (f, g) in enumerate(pairs, start=1):
        node = idx if not cyclic or idx < len(chain) else 0
        G = f.target
        ker = g.kernel()
        im = f.image()
        if not im <= ker:
            report.junctions.append(JunctionResult(node, G.label, False, None, "composite is nonzero"))
            continue
        defect = quotient_descriptor(ker, im)
        report.junctions.append(JunctionResult(node, G.label, defect.is_trivial(), defect))
    return report


# --------------------------------------------------------------------------
# extensions


def _p_part(factors, p) -> list[int]:
    return sorted(p ** e for f in factors for q, e in factorint(f).items() if q == p)


def _partitions_of(n: int, maxpart: int | None = None):
    if n == 0:
        yield ()
        return
    for k in range(min(n, maxpart or n), 0, -1):
        for rest in _partitions_of(n - k, k):
            yield (k,) + rest


def _has_sub_quot(E: list[int], sub: list[int], quot: list[int]) -> bool:
    """Does Z/E_1 + ... contain a copy of ``sub`` whose quotient is ``quot``?"""
    if prod(E) != prod(sub) * prod(quot):
        return False
    target_quot = _normalize_factors(quot)
    if not sub:
        return _normalize_factors(E) == target_quot
    k = len(E)
    by_order: dict[int, list] = {}
    for x in itertools.product(*[range(e) for e in E]):
        o = 1
        for xi, e in zip(x, E):
            o = lcm(o, e // gcd(xi, e))
        by_order.setdefault(o, []).append(x)
    target_sub = _normalize_factors(sub)
    ambient_rel = [[E[i] if i == j else 0 for j in range(k)] for i in range(k)]
    for combo in itertools.product(*[by_order.get(s, []) for s in sub]):
        rel = ambient_rel + [list(g) for g in combo]
        facs = invariant_factors(zmat(rel, len(rel), k))
        if _normalize_factors(f for f in facs if f > 1) != target_quot:
            continue
        if _subgroup_type(combo, E) == target_sub:
            return True
    return False


def _ilog(c: int, p: int) -> int:
    e = 0
    while c > 1:
        c //= p
        e += 1
    return e


def _subgroup_type(gens, E) -> tuple[int, ...]:
    """Invariant factors of the subgroup of Z/E generated by ``gens`` (brute force)."""
    seen = {tuple(0 for _ in E)}
    frontier = list(seen)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % e for a, b, e in zip(x, g, E))
                if y not in seen:
                    seen.add(y)
                    new.append(y)
        frontier = new
    # type of a finite abelian group from counts of elements killed by each m
    n = len(seen)
    primes = factorint(n)
    factors = []
    for p, e in primes.items():
        # number of elements of order dividing p^j determines the partition
        counts = []
        for j in range(e + 1):
            pj = p**j
            counts.append(sum(1 for x in seen if all((pj * xi) % ei == 0 for xi, ei in zip(x, E))))
        # log_p of counts gives partial sums of the conjugate partition
        logs = [_ilog(c, p) for c in counts]
        conj = [logs[j] - logs[j - 1] for j in range(1, len(logs))]
        parts = [sum(1 for c in conj if c > i) for i in range(conj[0] if conj else 0)]
        factors += [p**q for q in parts if q]
    return _normalize_factors(factors)


def extension_candidates(sub: FgAbGroup, quot: FgAbGroup) -> tuple[FgAbGroup, ...]:
    """All finite groups E with a subgroup iso to ``sub`` and quotient iso to ``quot``.

    Both groups must be finite.  Works prime by prime with a brute-force test.
    """
    if sub.free_rank or quot.free_rank:
        raise ValueError("extension enumeration is only for finite groups")
    primes = set()
    for f in sub.invariant_factors + quot.invariant_factors:
        primes |= set(factorint(f))
    per_prime = []
    for p in sorted(primes):
        s = _p_part(sub.invariant_factors, p)
        q = _p_part(quot.invariant_factors, p)
        total = sum(factorint(x)[p] for x in s + q)
        options = []
        for lam in _partitions_of(total):
            E = sorted(p**e for e in lam)
            if _has_sub_quot(E, s, q):
                options.append(E)
        per_prime.append(options)
    out = []
    for choice in itertools.product(*per_prime):
        out.append(FgAbGroup.from_orders(0, [x for E in choice for x in E]))
    return tuple(sorted(set(out), key=lambda g: g.invariant_factors))


def resolve_extension(sub: DiffCohGroup, quot: FgAbGroup) -> DiffCohGroup | Ambiguous:
    """Middle term of ``0 -> sub -> E -> quot -> 0`` when it is forced.

    A divisible ``sub`` or a free ``quot`` forces the split extension.  The
    divisible and free summands always split off; what remains is an
    extension of the finite part of ``quot`` by the finitely generated part of
    ``sub``.
    """
    if isinstance(sub, FgAbGroup):
        sub = sub.as_diff()
    if isinstance(quot, DiffCohGroup):
        if quot.vector_dim or quot.torus_rank:
            if sub.is_divisible:
                return sub + quot
            if quot.torus_rank == 0 and sub.lattice_rank == 0:
                # Ext(Q^a, D + F) = 0 for D divisible and F finite
                rest = resolve_extension(sub, FgAbGroup(quot.lattice_rank, quot.finite_factors))
                if isinstance(rest, Ambiguous):
                    return Ambiguous(sub, quot, None if rest.candidates is None else tuple(DiffCohGroup(quot.vector_dim) + c for c in rest.candidates), rest.reason)
                return DiffCohGroup(quot.vector_dim) + rest
            return Ambiguous(sub, quot, None, "extension by a non-finitely-generated quotient with a lattice or torus obstruction")
        quot = quot.fg_part()
    if sub.is_divisible or not quot.invariant_factors:
        return sub + quot
    fg_sub = sub.fg_part()
    divisible = DiffCohGroup(sub.vector_dim, sub.torus_rank, quot.free_rank)
    if fg_sub.free_rank:
        return Ambiguous(sub, quot, None, "extension of a finite group by a lattice; candidates not enumerated")
    finite_quot = FgAbGroup(0, quot.invariant_factors)
    cands = extension_candidates(fg_sub, finite_quot)
    if len(cands) == 1:
        return divisible + cands[0]
    return Ambiguous(sub, quot, tuple(divisible + c for c in cands), "non-split extensions possible")
