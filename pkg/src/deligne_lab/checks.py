"""Deterministic invariant suites behind ``deligne-lab check``.

Each suite returns an ordered mapping ``case -> bool``.  Random cochains come
from a seeded generator so a suite run is reproducible.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor

from .cdga import free_cdga, sullivan_sphere, verify_cs_homotopy, verify_gauge
from .groups import FgAbGroup
from .deligne import DiffCochain, db_cup, check_diamond, diamond, periodic_complex, periodic_deligne_direct, periodic_deligne_split
from .simplicial import (
    Cochain,
    SignCocycle,
    build_product,
    build_sphere,
    cech_double_complex,
    circle,
    cochain_complex,
    cohomology,
    cone,
    cup,
    hemispheres,
    point,
    simplex,
    total_cohomology,
)
from .twisted import (
    IntegralTwistedComplex,
    Twist,
    differential_twist,
    mayer_vietoris_check,
    parity_shift,
    top_generator,
    twisted_complex,
    twisted_deligne_cohomology,
    twisted_periodic_cohomology,
)

__all__ = ["SUITES", "run_suite", "thread_cap", "builder_spaces"]


def thread_cap() -> int:
    raw = os.environ.get("DELIGNE_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def builder_spaces():
    """Small builder spaces of dimension at most 3."""
    return [
        ("point", point()),
        ("circle(4)", circle(4)),
        ("sphere(2)", build_sphere(2)),
        ("sphere(3)", build_sphere(3)),
        ("simplex(2)", simplex(2)),
        ("cone(circle(3))", cone(circle(3))),
        ("product(circle(3),circle(3))", build_product(circle(3), circle(3))),
    ]


def _rand_cochain(K, p, rng, kind="Z"):
    return Cochain(K, p, tuple(rng.randint(-3, 3) for _ in range(K.n_simplices(p))), kind)


def _rand_diff(K, n, m, rng):
    return DiffCochain(
        n,
        _rand_cochain(K, m, rng),
        _rand_cochain(K, m - 1, rng, "Q"),
        _rand_cochain(K, m, rng, "Q") if m >= n else Cochain.zero(K, m, "Q"),
    )


def suite_d2() -> dict:
    out = {}
    for name, K in builder_spaces():
        out[f"{name} cochains"] = cochain_complex(K).is_complex()
        out[f"{name} cech"] = cech_double_complex(K).total.is_complex()
        for par in ("ev", "odd"):
            C = periodic_complex(K, par)
            out[f"{name} deligne {par}"] = all(C.check_square_zero(t) for t in (-1, 0, 1))
    for k in (1, 2):
        K = build_sphere(2 * k + 1)
        C = IntegralTwistedComplex(K, Twist.integral(top_generator(K, 2 * k + 1, 2)))
        out[f"sphere({2 * k + 1}) integral twist"] = C.check_square_zero(0) and C.check_square_zero(1)
    K = build_sphere(3)
    tw = Twist.differential(differential_twist(top_generator(K, 3, 2)))
    for par in ("ev", "odd"):
        C = twisted_complex(K, tw, par)
        out[f"sphere(3) differential twist {par}"] = all(C.check_square_zero(t) for t in (-1, 0, 1))
    return out


def suite_leibniz(seed: int = 0) -> dict:
    rng = random.Random(seed)
    out = {}
    for name, K in (("sphere(2)", build_sphere(2)), ("product(circle(3),circle(3))", build_product(circle(3), circle(3)))):
        for p in range(K.dim + 1):
            for q in range(K.dim + 1 - p):
                a, b = _rand_cochain(K, p, rng), _rand_cochain(K, q, rng)
                lhs = cup(a, b).coboundary()
                rhs = cup(a.coboundary(), b) + cup(a, b.coboundary()).scale(-1 if p % 2 else 1)
                out[f"{name} cup {p},{q}"] = lhs == rhs
        for m1, m2 in ((1, 1), (1, 0), (0, 2)):
            x, y = _rand_diff(K, m1, m1, rng), _rand_diff(K, m2, m2, rng)
            lhs = db_cup(x, y).d()
            rhs = db_cup(x.d(), y) + db_cup(x, y.d()).scale(-1 if m1 % 2 else 1)
            out[f"{name} triple cup {m1},{m2}"] = lhs == rhs
    return out


def suite_mv() -> dict:
    out = {}
    for n in (2, 3):
        K = build_sphere(n)
        U, V = hemispheres(K)
        out[f"sphere({n}) untwisted"] = mayer_vietoris_check(K, U, V).passed
        if n % 2:
            h = top_generator(K, n, 2)
            out[f"sphere({n}) integral twist"] = mayer_vietoris_check(K, U, V, Twist.integral(h)).passed
            out[f"sphere({n}) differential twist"] = mayer_vietoris_check(K, U, V, Twist.differential(differential_twist(h))).passed
        else:
            out[f"sphere({n}) differential twist"] = mayer_vietoris_check(
                K, U, V, Twist.differential(differential_twist(Cochain.zero(K, 1)))
            ).passed
    H = circle(6)
    eps = SignCocycle(H, {H.labels(H.simplices[1][0]): -1})
    U, V = hemispheres(H)
    out["circle(6) sign twist"] = mayer_vietoris_check(H, U, V, Twist.from_sign(eps)).passed
    return out


def suite_cohomologous(seed: int = 1) -> dict:
    rng = random.Random(seed)
    out = {}
    for k in (1, 2):
        n = 2 * k + 1
        K = build_sphere(n)
        h = top_generator(K, n, 3)
        base = twisted_periodic_cohomology(K, Twist.integral(h))
        b = _rand_cochain(K, n - 1, rng)
        out[f"sphere({n}) integral h + delta b"] = twisted_periodic_cohomology(K, Twist.integral(h + b.coboundary())) == base
    K = build_sphere(3)
    h = top_generator(K, 3, 2)
    base = twisted_deligne_cohomology(K, Twist.differential(differential_twist(h)))
    eta = _rand_cochain(K, 2, rng, "Q")
    out["sphere(3) differential eta shift"] = twisted_deligne_cohomology(K, Twist.differential(differential_twist(h, eta))) == base
    return out


def suite_parity() -> dict:
    out = {}
    for name, K in builder_spaces()[:4]:
        C = IntegralTwistedComplex(K)
        S = parity_shift(C)
        out[f"{name} shift swaps"] = S.cohomology_pair() == tuple(reversed(C.cohomology_pair()))
        out[f"{name} shift twice"] = parity_shift(S) is C
    return out


def _padded(groups, n):
    return list(groups) + [FgAbGroup()] * (n - len(groups))


def suite_cech() -> dict:
    out = {}
    for name, K in builder_spaces():
        a, b = total_cohomology(cech_double_complex(K)), cohomology(K)
        n = max(len(a), len(b))
        out[name] = _padded(a, n) == _padded(b, n)
    return out


def suite_diamond() -> dict:
    out = {}
    for name, K in (("point", point()), ("circle(4)", circle(4)), ("sphere(2)", build_sphere(2))):
        for par in ("ev", "odd"):
            D = diamond(K, par)
            out[f"{name} {par}"] = check_diamond(D).passed
    D = diamond(build_sphere(2), 2)
    check_diamond(D)
    out["sphere(2) R hits integral periods"] = D.extras["R_image_is_closed_integral"]
    out["sphere(2) R misses some closed cochain"] = not D.extras["R_onto_closed"]
    return out


def suite_split() -> dict:
    out = {}
    for name, K in builder_spaces()[:4]:
        for par in ("ev", "odd"):
            out[f"{name} {par}"] = periodic_deligne_direct(K, par) == periodic_deligne_split(K, par)
    return out


def suite_cdga() -> dict:
    out = {}
    for n in (2, 3):
        A = sullivan_sphere(n, 12)
        # the last generator of a sphere model is the odd one
        out[f"sphere({n}) cs"] = verify_cs_homotopy(A, A.names[-1]).passed
    F = free_cdga([("b", 2), ("h", 3)], {}, 13)
    out["free(b,h) gauge"] = verify_gauge(F, "h", "b").passed
    out["free(b,h) cs"] = verify_cs_homotopy(F, "h").passed
    for A in (sullivan_sphere(2, 12), F):
        out[f"{A.name} axioms"] = all(A.check().values())
    return out


SUITES = {
    "d2": suite_d2,
    "leibniz": suite_leibniz,
    "mv": suite_mv,
    "cohomologous": suite_cohomologous,
    "parity": suite_parity,
    "cech": suite_cech,
    "diamond": suite_diamond,
    "split": suite_split,
    "cdga": suite_cdga,
}


def run_suite(name: str) -> dict:
    """Run one suite or ``all``; results keep a fixed order whatever the thread count."""
    names = list(SUITES) if name == "all" else [name]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(unknown[0])
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        futures = [(n, pool.submit(SUITES[n])) for n in names]
        out = {}
        for n, fut in futures:
            for case, ok in fut.result().items():
                out[f"{n}: {case}"] = bool(ok)
    return out
