"""Finite graded-commutative dg algebras over Q and twisted de Rham operators.

Elements are dicts ``{monomial: Fraction}``; a monomial is a tuple of
exponents, one per generator, with odd generators appearing at most once.
Everything above the degree cap is set to zero, which is a quotient by a dg
ideal, so the truncation is again a cdga.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import factorial

import flint

from .simplicial import SpaceParseError

__all__ = [
    "NotClosed",
    "NotOdd",
    "NotEven",
    "CdgaParseError",
    "Cdga",
    "TwistForm",
    "sullivan_sphere",
    "free_cdga",
    "twisted_cohomology",
    "exp_element",
    "exp_gauge",
    "verify_gauge",
    "GaugeReport",
    "cs_series",
    "verify_cs_homotopy",
    "CsReport",
    "parse_cdga",
    "load_cdga",
]


class NotClosed(ValueError):
    pass


class NotOdd(ValueError):
    pass


class NotEven(ValueError):
    pass


class CdgaParseError(SpaceParseError):
    pass


def _clean(x: dict) -> dict:
    return {m: c for m, c in x.items() if c}


class Cdga:
    def __init__(self, generators, differential: dict | None = None, cap: int = 12, name: str = ""):
        self.names = [g for g, _ in generators]
        self.degrees = [int(d) for _, d in generators]
        if len(set(self.names)) != len(self.names):
            raise ValueError("repeated generator name")
        if any(d < 1 for d in self.degrees):
            raise ValueError("generators must have positive degree")
        self.cap = cap
        self.name = name
        self.basis = self._basis()
        self.index = {m: i for i, m in enumerate(self.basis)}
        self._dgen = [dict() for _ in self.names]
        for g, expr in (differential or {}).items():
            i = self.names.index(g)
            el = self.parse(expr) if isinstance(expr, str) else _clean(dict(expr))
            for m in el:
                if self.degree(m) != self.degrees[i] + 1:
                    raise ValueError(f"d({g}) must have degree {self.degrees[i] + 1}")
            self._dgen[i] = el
        self._dcache: dict = {}

    # basis and products
    def _basis(self) -> list[tuple]:
        ranges = []
        for d in self.degrees:
            top = 1 if d % 2 else self.cap // d
            ranges.append(range(top + 1))
        out = [m for m in iproduct(*ranges) if self.degree(m) <= self.cap]
        out.sort(key=lambda m: (self.degree(m), m))
        return out

    def degree(self, m: tuple) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def gen(self, name: str) -> dict:
        m = [0] * len(self.names)
        m[self.names.index(name)] = 1
        return {tuple(m): Fraction(1)} if self.degree(tuple(m)) <= self.cap else {}

    def one(self) -> dict:
        return {tuple([0] * len(self.names)): Fraction(1)}

    def _mono_mul(self, a: tuple, b: tuple):
        """Product of basis monomials as (sign, monomial) or None."""
        sign = 1
        for i, (ea, eb) in enumerate(zip(a, b)):
            if self.degrees[i] % 2 and ea and eb:
                return None
        # move each odd generator of b past the odd generators of a that come later
        for j, eb in enumerate(b):
            if eb and self.degrees[j] % 2:
                later = sum(1 for i in range(j + 1, len(a)) if a[i] and self.degrees[i] % 2)
                if later % 2:
                    sign = -sign
        m = tuple(x + y for x, y in zip(a, b))
        if self.degree(m) > self.cap:
            return None
        return sign, m

    def mul(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                r = self._mono_mul(a, b)
                if r is None:
                    continue
                s, m = r
                out[m] = out.get(m, 0) + s * ca * cb
        return _clean(out)

    def add(self, *xs: dict) -> dict:
        out: dict = {}
        for x in xs:
            for m, c in x.items():
                out[m] = out.get(m, 0) + c
        return _clean(out)

    def scale(self, c, x: dict) -> dict:
        return _clean({m: Fraction(c) * v for m, v in x.items()})

    def pow(self, x: dict, k: int) -> dict:
        out = self.one()
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def parity(self, x: dict) -> int | None:
        ps = {self.degree(m) % 2 for m in x}
        if len(ps) > 1:
            return None
        return next(iter(ps), 0)

    # differential
    def d_mono(self, m: tuple) -> dict:
        if m in self._dcache:
            return self._dcache[m]
        i = next((k for k, e in enumerate(m) if e), None)
        if i is None:
            return {}
        g = [0] * len(m)
        g[i] = 1
        g = tuple(g)
        rest = tuple(e - (k == i) for k, e in enumerate(m))
        r = self._mono_mul(g, rest)
        # m = g * rest with sign r[0] (always +1 since g precedes every other factor)
        sign = r[0] if r else 1
        rest_el = {rest: Fraction(1)}
        g_el = {g: Fraction(1)}
        term1 = self.mul(self._dgen[i], rest_el)
        term2 = self.mul(g_el, self.d(rest_el))
        if self.degrees[i] % 2:
            term2 = self.scale(-1, term2)
        out = self.scale(sign, self.add(term1, term2))
        self._dcache[m] = out
        return out

    def d(self, x: dict) -> dict:
        out: dict = {}
        for m, c in x.items():
            for n, v in self.d_mono(m).items():
                out[n] = out.get(n, 0) + c * v
        return _clean(out)

    # checks
    def check(self) -> dict:
        d2 = all(not self.d(self.d({m: Fraction(1)})) for m in self.basis)
        comm = True
        for a in self.basis:
            for b in self.basis:
                x, y = {a: Fraction(1)}, {b: Fraction(1)}
                s = -1 if (self.degree(a) * self.degree(b)) % 2 else 1
                if self.mul(x, y) != self.scale(s, self.mul(y, x)):
                    comm = False
        leib = True
        gens = [self.gen(n) for n in self.names]
        for x in gens:
            for y in gens:
                if not x or not y:
                    continue
                px = self.parity(x)
                lhs = self.d(self.mul(x, y))
                rhs = self.add(self.mul(self.d(x), y), self.scale(-1 if px else 1, self.mul(x, self.d(y))))
                if lhs != rhs:
                    leib = False
        return {"d_squared_zero": d2, "graded_commutative": comm, "leibniz": leib}

    # linear algebra
    def parity_basis(self, par: int) -> list[tuple]:
        return [m for m in self.basis if self.degree(m) % 2 == par]

    def operator(self, f, src: list[tuple], tgt: list[tuple]) -> flint.fmpq_mat:
        """Matrix of the linear map ``f`` (element -> element) from src to tgt."""
        ti = {m: i for i, m in enumerate(tgt)}
        M = flint.fmpq_mat(len(tgt), len(src))
        for j, m in enumerate(src):
            for n, c in f({m: Fraction(1)}).items():
                if n not in ti:
                    raise ValueError("operator leaves the target basis")
                M[ti[n], j] = flint.fmpq(c.numerator, c.denominator)
        return M

    def cohomology_dims(self) -> dict:
        """Ordinary cohomology dimensions in degrees below the cap."""
        out = {}
        for k in range(self.cap):
            Bk = [m for m in self.basis if self.degree(m) == k]
            Bm = [m for m in self.basis if self.degree(m) == k - 1]
            Bp = [m for m in self.basis if self.degree(m) == k + 1]
            dk = self.operator(self.d, Bk, Bp).rank() if Bk and Bp else 0
            dm = self.operator(self.d, Bm, Bk).rank() if Bm and Bk else 0
            dim = len(Bk) - dk - dm
            if dim:
                out[k] = dim
        return out

    def element_str(self, x: dict) -> str:
        if not x:
            return "0"
        parts = []
        for m, c in sorted(x.items(), key=lambda t: (self.degree(t[0]), t[0])):
            mono = "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(self.names, m) if e) or "1"
            parts.append(f"{c}*{mono}" if c != 1 else mono)
        return " + ".join(parts)

    # expression parsing
    def parse(self, text: str) -> dict:
        return _ExprParser(self, text).parse()


class _ExprParser:
    _tok = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")

    def __init__(self, A: Cdga, text: str):
        self.A = A
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = self._tok.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse {text[pos:]!r}")
            num, name, op = m.groups()
            self.toks.append(("num", num) if num else ("name", name) if name else ("op", "^" if op == "**" else op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> dict:
        if not self.toks:
            return {}
        x = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input at token {self.peek()[1]!r}")
        return x

    def expr(self) -> dict:
        A = self.A
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        x = A.scale(sign, self.term())
        while self.peek() in (("op", "+"), ("op", "-")):
            s = -1 if self.take()[1] == "-" else 1
            x = A.add(x, A.scale(s, self.term()))
        return x

    def term(self) -> dict:
        A = self.A
        x = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            y = self.factor()
            if op == "/":
                if set(y) != {tuple([0] * len(A.names))}:
                    raise ValueError("can only divide by a number")
                x = A.scale(1 / y[tuple([0] * len(A.names))], x)
            else:
                x = A.mul(x, y)
        return x

    def factor(self) -> dict:
        A = self.A
        kind, val = self.take()
        if kind == "num":
            base = A.scale(Fraction(val), A.one())
        elif kind == "name":
            if val not in A.names:
                raise ValueError(f"unknown generator {val!r}")
            base = A.gen(val)
        elif (kind, val) == ("op", "("):
            base = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("missing ')'")
        else:
            raise ValueError(f"unexpected token {val!r}")
        if self.peek() == ("op", "^"):
            self.take()
            k, e = self.take()
            if k != "num" or "/" in e:
                raise ValueError("exponent must be a non-negative integer")
            base = A.pow(base, int(e))
        return base


# --------------------------------------------------------------------------
# models


def sullivan_sphere(n: int, cap: int | None = None) -> Cdga:
    """Minimal model of S^n: Lambda(x_n), plus y_(2n-1) with dy = x^2 when n is even."""
    if n < 1:
        raise ValueError("n >= 1")
    if n % 2:
        return Cdga([("x", n)], {}, cap if cap is not None else 2 * n + 3, f"S^{n}")
    # an even cap keeps the top truncated degree exact
    c = cap if cap is not None else 3 * n
    return Cdga([("x", n), ("y", 2 * n - 1)], {"y": "x^2"}, c, f"S^{n}")


def free_cdga(generators, differential: dict | None = None, cap: int = 12) -> Cdga:
    return Cdga(generators, differential or {}, cap, "free")


@dataclass(frozen=True)
class TwistForm:
    A: Cdga
    H: tuple  # frozen items of the element

    @classmethod
    def make(cls, A: Cdga, H) -> "TwistForm":
        el = A.parse(H) if isinstance(H, str) else _clean(dict(H))
        if A.parity(el) not in (1,) and el:
            raise NotOdd("twist form must have odd degree")
        if A.d(el):
            raise NotClosed(f"dH = {A.element_str(A.d(el))} is nonzero")
        return cls(A, tuple(sorted(el.items())))

    @property
    def element(self) -> dict:
        return dict(self.H)

    @property
    def degrees(self) -> set:
        return {self.A.degree(m) for m in self.element}


def _mat_zero(M: flint.fmpq_mat) -> bool:
    return all(M[i, j] == 0 for i in range(M.nrows()) for j in range(M.ncols()))


def twisted_cohomology(A: Cdga, H) -> tuple[int, int]:
    """Dimensions of even/odd cohomology of d_H = d + H."""
    tf = H if isinstance(H, TwistForm) else TwistForm.make(A, H)
    h = tf.element
    if A.mul(h, h):
        raise NotClosed("H.H is nonzero")

    def dH(x):
        return A.add(A.d(x), A.mul(h, x))

    ev, od = A.parity_basis(0), A.parity_basis(1)
    D0 = A.operator(dH, ev, od)
    D1 = A.operator(dH, od, ev)
    if len(ev) and len(od):
        if not _mat_zero(D1 * D0) or not _mat_zero(D0 * D1):
            raise NotClosed("d_H does not square to zero")
    r0 = D0.rank() if len(ev) and len(od) else 0
    r1 = D1.rank() if len(ev) and len(od) else 0
    return len(ev) - r0 - r1, len(od) - r1 - r0


# --------------------------------------------------------------------------
# gauge operators and Chern-Simons series


def exp_element(A: Cdga, B: dict) -> dict:
    """e^B = 1 + B + B^2/2 + ... for even B without constant term."""
    if B and A.parity(B) != 0:
        raise NotEven("B must be even")
    if tuple([0] * len(A.names)) in B:
        raise NotEven("B must have no constant term")
    out = A.one()
    term = A.one()
    j = 0
    while True:
        j += 1
        term = A.mul(term, B)
        if not term:
            return out
        out = A.add(out, A.scale(Fraction(1, factorial(j)), term))


def exp_gauge(A: Cdga, B):
    """The operator omega -> e^B . omega."""
    Bel = A.parse(B) if isinstance(B, str) else B
    E = exp_element(A, Bel)
    return lambda x: A.mul(E, x)


@dataclass
class GaugeReport:
    inverse_ok: bool
    conjugation_ok: bool
    chain_map_ok: bool
    dB_equals_H: bool
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.inverse_ok and self.conjugation_ok and (self.chain_map_ok == self.dB_equals_H)


def verify_gauge(A: Cdga, H, B) -> GaugeReport:
    h = A.parse(H) if isinstance(H, str) else H
    Bel = A.parse(B) if isinstance(B, str) else B
    E, Einv = exp_element(A, Bel), exp_element(A, A.scale(-1, Bel))
    dB = A.d(Bel)
    inv = A.mul(E, Einv) == A.one()

    def dH(x, form=h):
        return A.add(A.d(x), A.mul(form, x))

    shifted = A.add(h, A.scale(-1, dB))
    conj, chain = True, True
    for m in A.basis:
        w = {m: Fraction(1)}
        lhs = A.mul(E, dH(A.mul(Einv, w)))
        if lhs != dH(w, shifted):
            conj = False
        if A.d(A.mul(E, w)) != A.mul(E, dH(w)):
            chain = False
    return GaugeReport(inv, conj, chain, dB == _clean(h))


def cs_series(A: Cdga, a) -> dict:
    """CS(a) = a + a.da/2! + a.da.da/3! + ..."""
    ael = A.parse(a) if isinstance(a, str) else a
    if ael and A.parity(ael) != 1:
        raise NotOdd("a must be odd")
    da = A.d(ael)
    out: dict = {}
    term = ael
    j = 0
    while term:
        out = A.add(out, A.scale(Fraction(1, factorial(j + 1)), term))
        j += 1
        term = A.mul(term, da)
    return out


@dataclass
class CsReport:
    element_identity: bool
    operator_identity: bool
    cs: dict

    @property
    def passed(self) -> bool:
        return self.element_identity and self.operator_identity


def verify_cs_homotopy(A: Cdga, a) -> CsReport:
    """d(CS(a)) = e^(da) - 1 and d(CS.w) + CS.dw = (e^(da) - 1).w on the basis."""
    ael = A.parse(a) if isinstance(a, str) else a
    cs = cs_series(A, ael)
    da = A.d(ael)
    e_minus_1 = A.add(exp_element(A, da), A.scale(-1, A.one()))
    elem = A.d(cs) == e_minus_1
    op = True
    for m in A.basis:
        w = {m: Fraction(1)}
        lhs = A.add(A.d(A.mul(cs, w)), A.mul(cs, A.d(w)))
        if lhs != A.mul(e_minus_1, w):
            op = False
            break
    return CsReport(elem, op, cs)


# --------------------------------------------------------------------------
# model files


def parse_cdga(text: str) -> Cdga:
    """Format::

        name: S2
        generators: x:2, y:3
        cap: 6
        d(y) = x^2
    """
    gens, diffs, cap, name = None, {}, None, ""
    gline = 1
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"d\(\s*([A-Za-z_][A-Za-z_0-9]*)\s*\)\s*=\s*(.*)", line)
        if m:
            if m.group(1) in diffs:
                raise CdgaParseError(f"d({m.group(1)}) given twice", no)
            diffs[m.group(1)] = (m.group(2), no)
            continue
        if ":" not in line:
            raise CdgaParseError(f"expected 'key: value' or 'd(g) = expr', got {line!r}", no)
        key, val = (s.strip() for s in line.split(":", 1))
        if key == "generators":
            gens = []
            gline = no
            for item in val.split(","):
                if ":" not in item:
                    raise CdgaParseError(f"generator {item.strip()!r} needs 'name:degree'", no)
                g, d = (s.strip() for s in item.split(":", 1))
                if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", g) or not d.isdigit() or int(d) < 1:
                    raise CdgaParseError(f"bad generator {item.strip()!r}", no)
                gens.append((g, int(d)))
        elif key == "cap":
            if not val.isdigit():
                raise CdgaParseError("cap must be a non-negative integer", no)
            cap = int(val)
        elif key == "name":
            name = val
        else:
            raise CdgaParseError(f"unknown key {key!r}", no)
    if not gens:
        raise CdgaParseError("no generators declared", gline)
    if cap is None:
        cap = 2 * sum(d for _, d in gens)
    try:
        A = Cdga(gens, {}, cap, name)
    except ValueError as e:
        raise CdgaParseError(str(e), gline) from None
    for g, (expr, no) in diffs.items():
        if g not in A.names:
            raise CdgaParseError(f"d of undeclared generator {g!r}", no)
        try:
            el = A.parse(expr)
        except ValueError as e:
            raise CdgaParseError(str(e), no) from None
        i = A.names.index(g)
        for mono in el:
            if A.degree(mono) != A.degrees[i] + 1:
                raise CdgaParseError(f"d({g}) has a term of degree {A.degree(mono)}, expected {A.degrees[i] + 1}", no)
        A._dgen[i] = el
    A._dcache.clear()
    for g, (expr, no) in diffs.items():
        if A.d(A.d(A.gen(g))):
            raise CdgaParseError(f"d(d({g})) is nonzero; the differential is not consistent", no)
    return A


def load_cdga(spec: str) -> Cdga:
    import os

    m = re.fullmatch(r"\s*(?:sullivan_)?sphere\((\d+)\)\s*", spec)
    if m:
        return sullivan_sphere(int(m.group(1)))
    if "\n" in spec:
        return parse_cdga(spec)
    if not os.path.exists(spec):
        raise CdgaParseError(f"no model file {spec!r}", None)
    with open(spec) as fh:
        return parse_cdga(fh.read())
