"""Exact matrices over Z and Q.

Bulk work (rank, rref, HNF, invariant factors) is delegated to python-flint;
``smith_normal_form`` is a self-contained elimination that also returns the
unimodular transforms.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
import heapq
from math import gcd, lcm

import flint

__all__ = [
    "ExactMatrix",
    "smith_normal_form",
    "invariant_factors",
    "qmat",
    "zmat",
    "to_fraction",
    "rref",
    "rank",
    "nullspace",
    "int_kernel",
    "lattice_basis",
    "solve",
    "complement_projector",
    "hstack",
    "vstack",
    "block_diag",
    "sparse_entries",
    "sparse_invariant_factors",
]


def to_fraction(x) -> Fraction:
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    return Fraction(x)


def _fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    f = Fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


def qmat(rows, nrows: int | None = None, ncols: int | None = None) -> flint.fmpq_mat:
    """Build an ``fmpq_mat`` from nested Python numbers (empty shapes allowed)."""
    rows = [list(r) for r in rows]
    if nrows is None:
        nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if nrows == 0 or ncols == 0:
        return flint.fmpq_mat(nrows, ncols)
    flat = [_fmpq(x) for r in rows for x in r]
    return flint.fmpq_mat(nrows, ncols, flat)


def zmat(rows, nrows: int | None = None, ncols: int | None = None) -> flint.fmpz_mat:
    rows = [list(r) for r in rows]
    if nrows is None:
        nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if nrows == 0 or ncols == 0:
        return flint.fmpz_mat(nrows, ncols)
    return flint.fmpz_mat(nrows, ncols, [int(x) for r in rows for x in r])


def _as_q(M) -> flint.fmpq_mat:
    if isinstance(M, flint.fmpq_mat):
        return M
    if isinstance(M, flint.fmpz_mat):
        return flint.fmpq_mat(M)
    if isinstance(M, ExactMatrix):
        return M.q
    raise TypeError(type(M))


def _rows(M) -> list[list]:
    return [list(r) for r in M.tolist()] if M.nrows() and M.ncols() else [[] for _ in range(M.nrows())]


# --------------------------------------------------------------------------
# ExactMatrix


class ExactMatrix:
    """Immutable exact matrix tagged with its scalar kind ``"Z"`` or ``"Q"``."""

    __slots__ = ("_m", "kind", "_sp")

    def __init__(self, data, kind: str = "Z", shape: tuple[int, int] | None = None):
        if kind not in ("Z", "Q"):
            raise ValueError(f"unknown scalar kind {kind!r}")
        if isinstance(data, (flint.fmpz_mat, flint.fmpq_mat)):
            m = data
            if kind == "Z" and isinstance(m, flint.fmpq_mat):
                ents = [to_fraction(x) for x in m.entries()]
                if any(e.denominator != 1 for e in ents):
                    raise ValueError("integer-kind matrix has non-integral entries")
                m = flint.fmpz_mat(m.nrows(), m.ncols(), [int(e) for e in ents]) if ents else flint.fmpz_mat(m.nrows(), m.ncols())
            elif kind == "Q" and isinstance(m, flint.fmpz_mat):
                m = flint.fmpq_mat(m)
        else:
            rows = [list(r) for r in data]
            nr, nc = shape if shape is not None else (len(rows), len(rows[0]) if rows else 0)
            if any(len(r) != nc for r in rows) or len(rows) != nr:
                raise ValueError("ragged or mis-shaped matrix data")
            if kind == "Z":
                for r in rows:
                    for x in r:
                        if type(x) is not int and Fraction(x).denominator != 1:
                            raise ValueError("integer-kind matrix has non-integral entries")
                m = zmat(rows, nr, nc)
            else:
                m = qmat(rows, nr, nc)
        object.__setattr__(self, "_m", m)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "_sp", None)

    @classmethod
    def from_sparse(cls, entries: dict, shape: tuple[int, int], kind: str = "Z") -> "ExactMatrix":
        """Build from ``{(i, j): value}``; the sparse data is kept for elimination."""
        nr, nc = shape
        if kind == "Z":
            m = flint.fmpz_mat(nr, nc)
            for (i, j), v in entries.items():
                if type(v) is not int and Fraction(v).denominator != 1:
                    raise ValueError("integer-kind matrix has non-integral entries")
                m[i, j] = int(v)
        else:
            m = flint.fmpq_mat(nr, nc)
            for (i, j), v in entries.items():
                m[i, j] = _fmpq(v)
        out = cls(m, kind)
        object.__setattr__(out, "_sp", {k: v for k, v in entries.items() if v})
        return out

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int, kind: str = "Z") -> "ExactMatrix":
        m = flint.fmpz_mat(rows, cols) if kind == "Z" else flint.fmpq_mat(rows, cols)
        return cls(m, kind)

    @classmethod
    def identity(cls, n: int, kind: str = "Z") -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], kind, (n, n))

    @property
    def rows(self) -> int:
        return self._m.nrows()

    @property
    def cols(self) -> int:
        return self._m.ncols()

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def q(self) -> flint.fmpq_mat:
        return self._m if self.kind == "Q" else flint.fmpq_mat(self._m)

    @property
    def z(self) -> flint.fmpz_mat:
        if self.kind != "Z":
            raise TypeError("rational matrix has no integer view")
        return self._m

    @property
    def entries(self) -> list[list]:
        conv = int if self.kind == "Z" else to_fraction
        return [[conv(x) for x in r] for r in _rows(self._m)]

    def __getitem__(self, ij):
        i, j = ij
        x = self._m[i, j]
        return int(x) if self.kind == "Z" else to_fraction(x)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self._sp is not None and other._sp is not None:
            return _sparse_matmul(self, other)
        if self.kind == other.kind == "Z":
            if self.rows == 0 or other.cols == 0 or self.cols == 0:
                return ExactMatrix.zeros(self.rows, other.cols, "Z")
            return ExactMatrix(self._m * other._m, "Z")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return ExactMatrix.zeros(self.rows, other.cols, "Q")
        return ExactMatrix(self.q * other.q, "Q")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        kind = "Z" if self.kind == other.kind == "Z" else "Q"
        if self.rows == 0 or self.cols == 0:
            return ExactMatrix.zeros(*self.shape, kind)
        if kind == "Z":
            return ExactMatrix(self._m + other._m, "Z")
        return ExactMatrix(self.q + other.q, "Q")

    def __neg__(self) -> "ExactMatrix":
        if self.rows == 0 or self.cols == 0:
            return self
        return ExactMatrix(-self._m, self.kind)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, c) -> "ExactMatrix":
        c = Fraction(c)
        if self.rows == 0 or self.cols == 0:
            return self
        if self.kind == "Z" and c.denominator == 1:
            return ExactMatrix(self._m * int(c), "Z")
        return ExactMatrix(self.q * _fmpq(c), "Q")

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self._m.transpose(), self.kind)

    def as_kind(self, kind: str) -> "ExactMatrix":
        return self if kind == self.kind else ExactMatrix(self._m, kind)

    def is_zero(self) -> bool:
        if self.rows == 0 or self.cols == 0:
            return True
        if self._sp is not None:
            return not self._sp
        return all(x == 0 for x in self._m.entries())

    def rank(self) -> int:
        return 0 if self.rows == 0 or self.cols == 0 else self._m.rank()

    def det(self):
        return int(self._m.det()) if self.kind == "Z" else to_fraction(self._m.det())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix) or self.shape != other.shape:
            return False
        return self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, tuple(map(tuple, self.entries))))

    def __repr__(self) -> str:
        return f"ExactMatrix({self.entries!r}, kind={self.kind!r})"


def _sparse_matmul(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    brows: dict[int, list] = {}
    for (k, j), v in B._sp.items():
        brows.setdefault(k, []).append((j, v))
    out: dict[tuple[int, int], object] = {}
    for (i, k), a in A._sp.items():
        for j, b in brows.get(k, ()):
            key = (i, j)
            out[key] = out.get(key, 0) + a * b
    kind = "Z" if A.kind == B.kind == "Z" else "Q"
    if kind == "Q":
        out = {k: to_fraction(v) if isinstance(v, (flint.fmpq, flint.fmpz)) else Fraction(v) for k, v in out.items()}
    return ExactMatrix.from_sparse(out, (A.rows, B.cols), kind)


def hstack(*mats: ExactMatrix) -> ExactMatrix:
    kind = "Z" if all(m.kind == "Z" for m in mats) else "Q"
    rows = mats[0].rows
    ents = [sum((m.entries[i] for m in mats), []) for i in range(rows)]
    return ExactMatrix(ents, kind, (rows, sum(m.cols for m in mats)))


def vstack(*mats: ExactMatrix) -> ExactMatrix:
    kind = "Z" if all(m.kind == "Z" for m in mats) else "Q"
    ents = [r for m in mats for r in m.entries]
    return ExactMatrix(ents, kind, (sum(m.rows for m in mats), mats[0].cols))


def block_diag(*mats: ExactMatrix) -> ExactMatrix:
    kind = "Z" if all(m.kind == "Z" for m in mats) else "Q"
    R = sum(m.rows for m in mats)
    C = sum(m.cols for m in mats)
    ents = [[0] * C for _ in range(R)]
    r0 = c0 = 0
    for m in mats:
        for i, row in enumerate(m.entries):
            ents[r0 + i][c0:c0 + m.cols] = row
        r0 += m.rows
        c0 += m.cols
    return ExactMatrix(ents, kind, (R, C))


# --------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(A: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return ``(S, U, V)`` with ``U @ A @ V == S`` and ``S`` in Smith form.

    Pivots are chosen as the nonzero entry of least absolute value in the
    remaining block; U and V are unimodular.
    """
    if A.kind != "Z":
        raise TypeError("smith_normal_form needs an integer matrix")
    m, n = A.shape
    S = A.entries
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        S[dst] = [a + c * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if S[i][j] and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            p = S[t][t]
            dirty = False
            for i in range(t + 1, m):
                if S[i][t]:
                    add_row(t, i, -(S[i][t] // p))
                    if S[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if S[t][j]:
                    add_col(t, j, -(S[t][j] // p))
                    if S[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remainder in row/column t into the pivot
                cands = [(abs(S[i][t]), i, t) for i in range(t + 1, m) if S[i][t]]
                cands += [(abs(S[t][j]), t, j) for j in range(t + 1, n) if S[t][j]]
                _, i, j = min(cands)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return (ExactMatrix(S, "Z", (m, n)), ExactMatrix(U, "Z", (m, m)), ExactMatrix(V, "Z", (n, n)))


def invariant_factors(A) -> list[int]:
    """Nonzero diagonal of the Smith form of an integer matrix (flint-backed)."""
    M = A.z if isinstance(A, ExactMatrix) else A
    if M.nrows() == 0 or M.ncols() == 0:
        return []
    S = M.snf()
    out = []
    for i in range(min(S.nrows(), S.ncols())):
        d = int(S[i, i])
        if d:
            out.append(abs(d))
    return out


# --------------------------------------------------------------------------
# rational helpers on fmpq_mat (rows are vectors unless stated)


def rref(M) -> tuple[flint.fmpq_mat, list[int]]:
    """Reduced row echelon form with zero rows dropped, plus pivot columns."""
    M = _as_q(M)
    nr, nc = M.nrows(), M.ncols()
    if nr == 0 or nc == 0:
        return flint.fmpq_mat(0, nc), []
    R, r = M.rref()
    rows = _rows(R)[:r]
    piv = []
    for row in rows:
        piv.append(next(j for j, x in enumerate(row) if x != 0))
    return (qmat(rows, r, nc) if r else flint.fmpq_mat(0, nc)), piv


def rank(M) -> int:
    M = _as_q(M)
    if M.nrows() == 0 or M.ncols() == 0:
        return 0
    return M.rank()


def nullspace(M) -> flint.fmpq_mat:
    """Rows spanning the right kernel ``{x : M x = 0}``."""
    M = _as_q(M)
    nc = M.ncols()
    R, piv = rref(M)
    free = [j for j in range(nc) if j not in set(piv)]
    Rr = _rows(R)
    basis = []
    for f in free:
        v = [flint.fmpq(0)] * nc
        v[f] = flint.fmpq(1)
        for i, p in enumerate(piv):
            v[p] = -Rr[i][f]
        basis.append(v)
    return qmat(basis, len(basis), nc) if basis else flint.fmpq_mat(0, nc)


def _clear_denominators(M: flint.fmpq_mat) -> flint.fmpz_mat:
    """Scale each row to a primitive-ish integer row (row spans unchanged over Q)."""
    rows = _rows(M)
    out = []
    for r in rows:
        d = reduce(lcm, (int(x.q) for x in r), 1)
        out.append([int((x * d).p) for x in r])
    return zmat(out, M.nrows(), M.ncols())


def int_kernel(A) -> flint.fmpz_mat:
    """Rows forming a Z-basis of ``{x in Z^n : A x = 0}`` for rational or integer A."""
    if isinstance(A, ExactMatrix):
        A = A.q
    if isinstance(A, flint.fmpq_mat):
        A = _clear_denominators(A) if A.nrows() and A.ncols() else flint.fmpz_mat(A.nrows(), A.ncols())
    m, n = A.nrows(), A.ncols()
    if n == 0:
        return flint.fmpz_mat(0, 0)
    if m == 0:
        return flint.fmpz_mat([[int(i == j) for j in range(n)] for i in range(n)])
    At = A.transpose()
    aug = zmat([list(At.tolist()[i]) + [int(i == j) for j in range(n)] for i in range(n)], n, m + n)
    H = aug.hnf()
    rows = []
    for row in _rows(H):
        if all(x == 0 for x in row[:m]) and any(x != 0 for x in row[m:]):
            rows.append([int(x) for x in row[m:]])
    return zmat(rows, len(rows), n) if rows else flint.fmpz_mat(0, n)


def lattice_basis(gens: flint.fmpq_mat) -> flint.fmpq_mat:
    """Z-basis (rows) of the subgroup generated by the rows of ``gens``."""
    nr, nc = gens.nrows(), gens.ncols()
    if nr == 0 or nc == 0:
        return flint.fmpq_mat(0, nc)
    d = reduce(lcm, (int(x.q) for x in gens.entries()), 1)
    Z = zmat([[int((x * d).p) for x in r] for r in _rows(gens)], nr, nc)
    H = Z.hnf()
    rows = [r for r in _rows(H) if any(x != 0 for x in r)]
    if not rows:
        return flint.fmpq_mat(0, nc)
    return qmat([[flint.fmpq(int(x), d) for x in r] for r in rows], len(rows), nc)


def solve(A, b):
    """One rational solution ``x`` (list) of ``A x = b`` or ``None``."""
    A = _as_q(A)
    m, n = A.nrows(), A.ncols()
    b = [_fmpq(x) for x in b]
    if n == 0:
        return [] if all(x == 0 for x in b) else None
    if m == 0:
        return [flint.fmpq(0)] * n
    aug = qmat([list(r) + [b[i]] for i, r in enumerate(_rows(A))], m, n + 1)
    R, piv = rref(aug)
    if n in piv:
        return None
    x = [flint.fmpq(0)] * n
    Rr = _rows(R)
    for i, p in enumerate(piv):
        x[p] = Rr[i][n]
    return x


def solve_many(A, B):
    """One rational ``X`` with ``A X = B`` (all columns at once) or ``None``."""
    A, B = _as_q(A), _as_q(B)
    m, n, k = A.nrows(), A.ncols(), B.ncols()
    if k == 0:
        return flint.fmpq_mat(n, 0)
    if m == 0:
        return flint.fmpq_mat(n, k)
    if n == 0:
        return flint.fmpq_mat(0, k) if all(x == 0 for x in B.entries()) else None
    Ar, Br = _rows(A), _rows(B)
    R, r = qmat([Ar[i] + Br[i] for i in range(m)], m, n + k).rref()
    Rr = _rows(R)
    X = [[flint.fmpq(0)] * k for _ in range(n)]
    for i in range(r):
        p = next(j for j, x in enumerate(Rr[i]) if x != 0)
        if p >= n:
            return None
        X[p] = Rr[i][n:]
    return qmat(X, n, k)


def complement_projector(W: flint.fmpq_mat, n: int) -> flint.fmpq_mat:
    """Matrix ``P`` (k x n) with kernel exactly the row span of ``W``."""
    R, piv = rref(W) if W.nrows() else (flint.fmpq_mat(0, n), [])
    pset = set(piv)
    free = [j for j in range(n) if j not in pset]
    Rr = _rows(R)
    rows = []
    for f in free:
        row = [flint.fmpq(0)] * n
        row[f] = flint.fmpq(1)
        for i, p in enumerate(piv):
            row[p] = -Rr[i][f]
        rows.append(row)
    return qmat(rows, len(rows), n) if rows else flint.fmpq_mat(0, n)


# --------------------------------------------------------------------------
# sparse elimination for large, mostly-unimodular matrices


def sparse_entries(M) -> dict[tuple[int, int], int]:
    if isinstance(M, ExactMatrix):
        if M._sp is not None and M.kind == "Z":
            return {k: int(v) for k, v in M._sp.items()}
        M = M.z
    out = {}
    if M.nrows() == 0 or M.ncols() == 0:
        return out
    for i, row in enumerate(M.tolist()):
        for j, x in enumerate(row):
            if x:
                out[(i, j)] = int(x)
    return out


def sparse_invariant_factors(entries: dict[tuple[int, int], int], nrows: int, ncols: int) -> list[int]:
    """Nonzero Smith invariants of a sparse integer matrix.

    Unit pivots are eliminated first (each contributes a factor 1), choosing
    the pivot with the smallest row-length times column-length product; the
    residual core goes to a dense Smith form.
    """
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for (i, j), v in entries.items():
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, set()).add(i)
    units = 0
    heap = [(len(r), i) for i, r in rows.items()]
    heapq.heapify(heap)
    while heap:
        n, pi = heapq.heappop(heap)
        prow = rows.get(pi)
        if prow is None or len(prow) != n:
            continue
        cand = [(len(cols[j]), j) for j, v in prow.items() if v in (1, -1)]
        if not cand:
            continue  # re-queued if a later elimination touches this row
        _, pj = min(cand)
        del rows[pi]
        pv = prow[pj]
        for j in prow:
            cols[j].discard(pi)
        for i in list(cols[pj]):
            r = rows[i]
            f = r[pj] * pv  # pv is its own inverse
            for j, v in prow.items():
                nv = r.get(j, 0) - f * v
                if nv:
                    if j not in r:
                        cols[j].add(i)
                    r[j] = nv
                elif j in r:
                    del r[j]
                    cols[j].discard(i)
            if r:
                heapq.heappush(heap, (len(r), i))
            else:
                del rows[i]
        del cols[pj]
        units += 1
    core_rows = sorted(rows)
    core_cols = sorted({j for r in rows.values() for j in r})
    if not core_rows:
        return [1] * units
    ri = {i: k for k, i in enumerate(core_rows)}
    ci = {j: k for k, j in enumerate(core_cols)}
    dense = [[0] * len(core_cols) for _ in core_rows]
    for i, r in rows.items():
        for j, v in r.items():
            dense[ri[i]][ci[j]] = v
    return [1] * units + invariant_factors(zmat(dense, len(core_rows), len(core_cols)))
