"""Twisted Atiyah-Hirzebruch spectral sequences for the periodic theories.

Pages store their entries as subquotients keyed by ``(p, t, kind)``: ``p`` is
the skeletal filtration degree, ``t`` the total degree relative to the
abutment (0 is the group being computed) and ``kind`` one of ``"Z"``
(integral cohomology), ``"flat"`` (Q/Z cohomology) or ``"forms"``.

Only the first differential d_(2k+1) is ever applied; the page after it is
declared converged only when every later differential has a zero source or
target.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .groups import (
    Ambiguous,
    DiffCohGroup,
    FgAbGroup,
    GroupMap,
    Subgroup,
    SubQuotient,
    resolve_extension,
)
from .linalg import ExactMatrix
from .deligne import _add, _cup_left_sparse, _put_matrix, _sparse_cob
from .simplicial import Cochain, SimplicialComplex, coboundary, u1_subquotient
from .twisted import Twist

__all__ = [
    "NotConverged",
    "SSPage",
    "integral_ahss",
    "differential_ahss",
    "assemble_abutment",
    "page_table",
]

# entries drawn in the two E2 lemmas: filtration degrees of the U(1) groups
_DRAWN = {"ev": {1, 2, 4}, "odd": {0, 2, 3, 4}}


class NotConverged(RuntimeError):
    pass


@dataclass
class SSPage:
    r: int
    entries: dict  # (p, t, kind) -> SubQuotient
    differentials: dict = field(default_factory=dict)  # (p, t, kind) -> GroupMap leaving it
    converged: bool | None = None  # None means undetermined
    theory: str = "integral"
    parity: str | None = None
    extrapolated: set = field(default_factory=set)
    notes: list = field(default_factory=list)

    def descriptor(self, key) -> DiffCohGroup:
        return self.entries[key].descriptor()

    def descriptors(self) -> dict:
        return {k: v.descriptor() for k, v in sorted(self.entries.items())}

    def is_zero(self, key) -> bool:
        return key not in self.entries or self.entries[key].is_trivial()

    def check_d_squared(self) -> bool:
        """d o d = 0 wherever two differentials compose."""
        for key, f in self.differentials.items():
            for key2, g in self.differentials.items():
                if g.source is f.target:
                    comp = f.then(g)
                    if not comp.image() <= g.target.den:
                        return False
        return True

    def to_dict(self) -> dict:
        return {
            "page": self.r,
            "theory": self.theory,
            "parity": self.parity,
            "converged": self.converged,
            "entries": [
                {"p": p, "t": t, "kind": k, "group": g.to_dict(), "extrapolated": (p, t, k) in self.extrapolated}
                for (p, t, k), g in self.descriptors().items()
            ],
            "notes": list(self.notes),
        }


def _page_after(page: SSPage, r: int) -> SSPage:
    """Homology of ``page`` with respect to its differentials."""
    incoming: dict = {}
    for key, f in page.differentials.items():
        tgt = next(k for k, v in page.entries.items() if v is f.target)
        incoming[tgt] = f
    out = {}
    for key, E in page.entries.items():
        num, den = E.num, E.den
        f = page.differentials.get(key)
        if f is not None:
            num = num.preimage(f.matrix.q, f.target.den)
        g = incoming.get(key)
        if g is not None:
            den = den + g.source.num.image(g.matrix.q)
        out[key] = SubQuotient(num, den, E.label)
    return SSPage(r, out, {}, None, page.theory, page.parity, set(page.extrapolated), list(page.notes))


def _positional(page: SSPage, first: int, dim: int, keys_from, shift_t: int) -> bool:
    """True when every d_r, r > first odd, has zero source or zero target."""
    for r in range(first + 2, dim + 2, 2):
        for (p, t, k) in keys_from:
            tgt = (p + r, t + shift_t, k)
            if not page.is_zero((p, t, k)) and not page.is_zero(tgt):
                return False
    return True


# --------------------------------------------------------------------------
# integral


def _zsub(K: SimplicialComplex, p: int) -> SubQuotient:
    n = K.n_simplices(p)
    dp = coboundary(K, p, "Q")
    num = Subgroup.integer_points(n).kernel(dp.q)
    if p >= 1:
        dm = coboundary(K, p - 1, "Q")
        den = Subgroup.integer_points(dm.cols).image(dm.q)
    else:
        den = Subgroup.zero(n)
    return SubQuotient(num, den, f"H^{p}(Z)")


def _cup_matrix(a: Cochain, p: int, rows: int, cols: int, sign: int = 1) -> ExactMatrix:
    ent = {k: sign * v for k, v in _cup_left_sparse(a, p).items()}
    return ExactMatrix.from_sparse(ent, (rows, cols), "Q")


def integral_ahss(K: SimplicialComplex, tw: Twist | None = None):
    """E2 and E_(2k+2) pages for delta + h cup with d_(2k+1) = -[h] cup."""
    if tw is not None and tw.kind != "integral":
        raise ValueError("integral AHSS needs an integral twist")
    E2 = SSPage(2, {(p, p % 2, "Z"): _zsub(K, p) for p in range(K.dim + 1)}, theory="integral")
    q = tw.degree if tw is not None else 3
    h = tw.cochain if tw is not None else Cochain.zero(K, q)
    dpage = SSPage(q, dict(E2.entries), theory="integral")
    for p in range(K.dim + 1 - q):
        src, tgt = dpage.entries[(p, p % 2, "Z")], dpage.entries[(p + q, (p + q) % 2, "Z")]
        M = _cup_matrix(h, p, K.n_simplices(p + q), K.n_simplices(p), -1)
        dpage.differentials[(p, p % 2, "Z")] = GroupMap(src, tgt, M, f"d{q}")
    if not all(f.well_defined() for f in dpage.differentials.values()):
        raise ArithmeticError("d is not well defined on cohomology")
    report = {"d_squared_zero": dpage.check_d_squared(), "first_differential": q}
    # degree-two-periodic: the only possible differentials have odd length
    E2.converged = _positional(E2, 1, K.dim, list(E2.entries), 1) and (h.is_zero() or all(
        dpage.is_zero(k) or dpage.is_zero((k[0] + q, (k[0] + q) % 2, "Z")) for k in E2.entries))
    Ef = _page_after(dpage, q + 1)
    keys = list(Ef.entries)
    Ef.converged = True if _positional(Ef, q, K.dim, keys, 1) else None
    if Ef.converged is None:
        Ef.notes.append("a later differential could be nonzero; abutment undetermined")
    report["converged"] = Ef.converged
    report["degenerates_at_E2"] = E2.converged
    report["pages"] = {2: E2.to_dict(), q + 1: Ef.to_dict()}
    return E2, Ef, report


# --------------------------------------------------------------------------
# differential


def _form_matrix(K: SimplicialComplex, H: Cochain, par: int) -> tuple[ExactMatrix, list, list]:
    """delta + H cup from periodic cochains of parity ``par`` to the other parity."""
    src = list(range(par, K.dim + 1, 2))
    tgt = list(range(1 - par, K.dim + 1, 2))
    so, to = {}, {}
    off = 0
    for d in src:
        so[d] = off
        off += K.n_simplices(d)
    ncol = off
    off = 0
    for d in tgt:
        to[d] = off
        off += K.n_simplices(d)
    nrow = off
    M: dict = {}
    for d in src:
        if d + 1 in to and K.n_simplices(d + 1):
            _put_matrix(M, _sparse_cob(K, d), to[d + 1], so[d])
        if d + H.degree in to:
            for (i, j), v in _cup_left_sparse(H, d).items():
                _add(M, (to[d + H.degree] + i, so[d] + j), v)
    return ExactMatrix.from_sparse(M, (nrow, ncol), "Q"), src, tgt


def _form_row(K: SimplicialComplex, H: Cochain, par: int) -> SubQuotient:
    """Twisted-closed cochains with integral periods: integer cocycles plus twisted coboundaries."""
    D, src, _ = _form_matrix(K, H, par)
    D_in, _, _ = _form_matrix(K, H, 1 - par)
    n = D.cols
    num = Subgroup.integer_points(n).kernel(D.q) + Subgroup.full_space(D_in.cols).image(D_in.q)
    return SubQuotient(num, Subgroup.zero(n), "twisted-closed forms")


def differential_ahss(K: SimplicialComplex, tw: Twist | None, parity: str):
    if parity not in ("ev", "odd"):
        raise ValueError("parity must be 'ev' or 'odd'")
    if tw is not None and tw.kind != "differential":
        raise ValueError("differential AHSS needs a differential twist")
    par = 0 if parity == "ev" else 1
    q = tw.degree if tw is not None else 3
    if tw is not None:
        c_h, H = tw.diff.c, tw.diff.w
    else:
        c_h, H = Cochain.zero(K, q), Cochain.zero(K, q, "Q")
    entries = {(0, 0, "forms"): _form_row(K, H, par)}
    flat_cache: dict = {}

    def flat(p):
        if p not in flat_cache:
            flat_cache[p] = u1_subquotient(K, p)
            flat_cache[p].label = f"H^{p}(Q/Z)"
        return flat_cache[p]

    for t in (-1, 0, 1):
        for p in range(0, K.dim + 1):
            if (p - par - 1 - t) % 2 == 0:
                entries[(p, t, "flat")] = flat(p) if t == 0 else SubQuotient(flat(p).num, flat(p).den, f"H^{p}(Q/Z)")
    E2 = SSPage(2, entries, theory="differential", parity=parity)
    for (p, t, k) in entries:
        if k == "flat" and t == 0 and p not in _DRAWN[parity]:
            E2.extrapolated.add((p, t, k))
    E2.notes.append("form row carries integral periods, so no differential leaves it")
    dpage = SSPage(q, dict(entries), theory="differential", parity=parity, extrapolated=set(E2.extrapolated))
    for (p, t, k) in entries:
        if k != "flat" or t == 1:
            continue
        tgt = (p + q, t + 1, "flat")
        if tgt in entries:
            M = _cup_matrix(c_h, p, K.n_simplices(p + q), K.n_simplices(p), -1)
            dpage.differentials[(p, t, k)] = GroupMap(entries[(p, t, k)], entries[tgt], M, f"d{q}")
    if not all(f.well_defined() for f in dpage.differentials.values()):
        raise ArithmeticError("d is not well defined on flat cohomology")
    report = {"d_squared_zero": dpage.check_d_squared(), "first_differential": q}
    Ef = _page_after(dpage, q + 1)
    flats = [k for k in Ef.entries if k[2] == "flat" and k[1] < 1]
    if tw is None or tw.is_zero():
        Ef.converged = True
        Ef.notes.append("untwisted: the weight splitting makes every differential vanish")
    else:
        Ef.converged = True if _positional(Ef, q, K.dim, flats, 1) else None
    E2.converged = bool(Ef.converged) and all(f.image() <= f.target.den for f in dpage.differentials.values())
    report["converged"] = Ef.converged
    report["pages"] = {2: E2.to_dict(), q + 1: Ef.to_dict()}
    return E2, Ef, report


# --------------------------------------------------------------------------
# abutment


def assemble_abutment(page: SSPage, parity: str | None = None):
    """Fold the t = 0 column, deepest filtration first, resolving extensions."""
    if page.converged is not True:
        raise NotConverged(f"page E_{page.r} is not known to be final")
    if page.theory == "integral":
        want = 0 if parity == "ev" else 1
        keys = sorted((k for k in page.entries if k[1] == want), reverse=True)
        graded = [page.descriptor(k) for k in keys]
    else:
        flats = sorted((k for k in page.entries if k[1] == 0 and k[2] == "flat"), reverse=True)
        keys = flats + [(0, 0, "forms")]
        graded = [page.descriptor(k) for k in keys]
    if not graded:
        return FgAbGroup() if page.theory == "integral" else DiffCohGroup()
    acc = graded[0]
    for g in graded[1:]:
        quot = g.fg_part() if (g.vector_dim == 0 and g.torus_rank == 0) else g
        acc = resolve_extension(acc, quot)
        if isinstance(acc, Ambiguous):
            return replace(acc, reason=f"{acc.reason}; associated graded {[str(x) for x in graded]}")
    if page.theory == "integral":
        return acc.fg_part()
    return acc


def page_table(page: SSPage) -> list[str]:
    lines = [f"E_{page.r} ({page.theory}{', ' + page.parity if page.parity else ''}; converged={page.converged})"]
    for (p, t, k), g in page.descriptors().items():
        flag = " [extrapolated]" if (p, t, k) in page.extrapolated else ""
        lines.append(f"  p={p} t={t} {k}: {g}{flag}")
    return lines
