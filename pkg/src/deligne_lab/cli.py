"""Command-line front end.

Exit status: 0 success, 1 parse or validation error (with location), 2 failed
mathematical precondition (with certificate), 3 undetermined result (ambiguous
extension or unconverged page), 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field

from .ahss import NotConverged, assemble_abutment, differential_ahss, integral_ahss, page_table
from .cdga import NotClosed, NotEven, NotOdd, load_cdga, twisted_cohomology
from .checks import SUITES, run_suite, thread_cap
from .deligne import (
    WeightMismatch,
    check_diamond,
    diamond,
    diff_cohomology,
    diff_cohomology_closed_form,
    periodic_deligne_direct,
    periodic_deligne_split,
)
from .groups import Ambiguous, DiffCohGroup, FgAbGroup
from .simplicial import NotACocycle, SpaceParseError, cohomology, load_space, u1_cohomology
from .twisted import (
    BadDecomposition,
    ObstructionNonzero,
    SignTwistedComplex,
    load_twist,
    twisted_deligne_cohomology,
    twisted_periodic_cohomology,
    twisted_sign_cohomology,
)

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_AMBIGUOUS, EXIT_CHECK = 0, 1, 2, 3, 4


# --------------------------------------------------------------------------
# reports


def group_to_dict(g) -> dict:
    if isinstance(g, Ambiguous):
        return g.to_dict()
    if isinstance(g, FgAbGroup):
        g = g.as_diff()
    return g.to_dict()


def group_from_dict(d: dict):
    if d.get("ambiguous"):
        cands = d["candidates"]
        return Ambiguous(
            DiffCohGroup.from_dict(d["sub"]),
            FgAbGroup.from_dict(d["quot"]),
            None if cands is None else tuple(DiffCohGroup.from_dict(c) for c in cands),
            d.get("reason", ""),
        )
    return DiffCohGroup.from_dict(d)


@dataclass
class Report:
    command: str
    request: dict
    results: dict = field(default_factory=dict)  # name -> DiffCohGroup or Ambiguous
    checks: dict = field(default_factory=dict)  # name -> bool
    timing: dict = field(default_factory=dict)  # stage -> seconds
    provenance: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    error: dict | None = None
    status: int = EXIT_OK

    def add(self, name: str, g):
        self.results[name] = g.as_diff() if isinstance(g, FgAbGroup) else g

    def to_dict(self) -> dict:
        d = asdict(self)
        d["results"] = {k: group_to_dict(v) for k, v in self.results.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        d = dict(d)
        d["results"] = {k: group_from_dict(v) for k, v in d["results"].items()}
        return cls(**d)

    def text(self) -> str:
        out = ["deligne-lab " + " ".join(str(v) for v in self.request.get("argv", []))]
        w = max((len(k) for k in self.results), default=0)
        for k, g in self.results.items():
            if isinstance(g, Ambiguous):
                cands = "unknown" if g.candidates is None else ", ".join(str(c) for c in g.candidates)
                out.append(f"  {k:<{w}} : ambiguous extension of {g.quot} by {g.sub}; candidates: {cands}")
            else:
                out.append(f"  {k:<{w}} : {g}")
        for k, ok in self.checks.items():
            out.append(f"  check {k}: {'pass' if ok else 'FAIL'}")
        for line in self.extra.get("page_lines", []):
            out.append(f"  {line}")
        for p in self.provenance:
            out.append(f"  via: {p}")
        for n in self.notes:
            out.append(f"  note: {n}")
        if self.error:
            out.append(f"  error ({self.error['type']}): {self.error['message']}")
            if self.error.get("certificate") is not None:
                out.append(f"  certificate: {self.error['certificate']}")
        total = sum(self.timing.values())
        out.append(f"  time: {total:.2f}s")
        return "\n".join(out)


class _Timer:
    def __init__(self, report: Report, stage: str):
        self.report, self.stage = report, stage

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timing[self.stage] = self.report.timing.get(self.stage, 0.0) + time.perf_counter() - self.t0


class UsageError(ValueError):
    pass


def _certificate(obj):
    if obj is None:
        return None
    to_dict = getattr(obj, "to_dict", None)
    if to_dict is None:
        return str(obj)
    # simplex -> coefficient, as JSON-safe pairs
    return [[list(k) if isinstance(k, tuple) else k, v if isinstance(v, int) else str(v)] for k, v in to_dict().items()]


def _located(e: SpaceParseError, spec: str) -> SpaceParseError:
    out = type(e)(f"{spec}, {e}")
    out.line = e.line
    return out


def _space(spec: str):
    try:
        return load_space(spec)
    except SpaceParseError as e:
        raise _located(e, spec) from None


def _twist(spec: str, K):
    try:
        return load_twist(spec, K)
    except SpaceParseError as e:
        raise _located(e, spec) from None


# --------------------------------------------------------------------------
# subcommands


def cmd_cohomology(args, rep: Report):
    K = _space(args.space)
    with _Timer(rep, "cohomology"):
        if args.coeff == "qz":
            groups = [u1_cohomology(K, p) for p in range(K.dim + 1)]
        elif args.coeff == "q":
            groups = [DiffCohGroup(vector_dim=g.free_rank) for g in cohomology(K, "Q")]
        else:
            groups = [g.as_diff() for g in cohomology(K, "Z")]
    if args.degree is not None:
        rep.add(f"H^{args.degree}", groups[args.degree] if 0 <= args.degree < len(groups) else DiffCohGroup())
    elif args.periodic:
        want = 0 if args.periodic == "ev" else 1
        total = DiffCohGroup()
        for p, g in enumerate(groups):
            if p % 2 == want:
                total = total + g
        rep.add(args.periodic, total)
    else:
        for p, g in enumerate(groups):
            rep.add(f"H^{p}", g)
    rep.provenance.append(f"cochains of {K.name} ({sum(K.n_simplices(p) for p in range(K.dim + 1))} simplices)")


def cmd_deligne(args, rep: Report):
    K = _space(args.space)
    if args.weight is not None:
        n = args.weight
        if n < 0:
            raise UsageError(f"weight must be >= 0, got {n}")
        with _Timer(rep, "direct"):
            rep.add(f"H^{n}_hat", diff_cohomology(K, n))
        with _Timer(rep, "closed form"):
            rep.checks["closed form agrees"] = rep.results[f"H^{n}_hat"] == diff_cohomology_closed_form(K, n)
        rep.provenance.append(f"weight-{n} triple complex")
        target = n
    else:
        par = args.periodic
        with _Timer(rep, "direct"):
            rep.add(par, periodic_deligne_direct(K, par))
        with _Timer(rep, "split"):
            rep.checks["weight splitting agrees"] = rep.results[par] == periodic_deligne_split(K, par)
        rep.provenance.append("periodic sum of weight complexes, checked against the weightwise split")
        target = par
    if args.check_diamond:
        with _Timer(rep, "diamond"):
            D = diamond(K, target)
            er = check_diamond(D)
        for j in er.junctions:
            rep.checks[f"diamond {j.label}"] = j.ok
        rep.checks["R image is the integral-period cocycles"] = bool(D.extras["R_image_is_closed_integral"])
        rep.notes.append(f"R onto all closed cochains: {bool(D.extras['R_onto_closed'])}")


def _direct(K, tw):
    if tw.kind == "integral":
        return twisted_periodic_cohomology(K, tw)
    if tw.kind == "differential":
        return twisted_deligne_cohomology(K, tw)
    return SignTwistedComplex(K, tw).cohomology_pair()


def _via_ahss(K, tw, pages: list | None = None):
    if tw.kind == "integral":
        _, Ef, report = integral_ahss(K, tw)
        if pages is not None:
            pages.extend(report["pages"].values())
        return tuple(assemble_abutment(Ef, par) for par in ("ev", "odd"))
    if tw.kind == "differential":
        out = []
        for par in ("ev", "odd"):
            _, Ef, report = differential_ahss(K, tw, par)
            if pages is not None:
                pages.extend(report["pages"].values())
            out.append(assemble_abutment(Ef, par))
        return tuple(out)
    raise UsageError("sign twists have no AHSS route; use --via direct")


def cmd_twisted(args, rep: Report):
    K = _space(args.space)
    tw = _twist(args.twist, K)
    rep.request["twist_kind"] = tw.kind
    # without --via: direct, rerouted to the AHSS when the cup square obstructs it
    via = args.via or "auto"
    if tw.kind == "sign" and via == "ahss":
        raise UsageError("sign twists have no AHSS route; use --via direct or both")
    routes = {}
    if via in ("direct", "both", "auto"):
        try:
            with _Timer(rep, "direct"):
                routes["direct"] = _direct(K, tw)
            rep.provenance.append(f"direct {tw.kind}-twisted complex")
        except ObstructionNonzero as e:
            if via != "auto":
                raise
            rep.notes.append(f"direct route obstructed ({e}); answered by the AHSS instead")
            rep.extra["obstruction"] = _certificate(e.certificate)
            via = "ahss"
    if via in ("ahss", "both"):
        if tw.kind == "sign":
            with _Timer(rep, "degreewise"):
                routes["degreewise"] = twisted_sign_cohomology(K, tw.sign)
            rep.provenance.append("degreewise local-system cohomology folded by parity")
        else:
            with _Timer(rep, "ahss"):
                routes["ahss"] = _via_ahss(K, tw)
            rep.provenance.append(f"{tw.kind} AHSS with first differential d_{tw.degree}")
    first = next(iter(routes.values()))
    for par, g in zip(("ev", "odd"), first):
        rep.add(par, g)
    if len(routes) == 2:
        a, b = (tuple(group_to_dict(g) for g in r) for r in routes.values())
        rep.checks["paths agree"] = a == b


def cmd_ahss(args, rep: Report):
    K = _space(args.space)
    tw = _twist(args.twist, K)
    if tw.kind == "sign":
        raise UsageError("the AHSS needs an integral or differential twist")
    rep.request["twist_kind"] = tw.kind
    pages: list = []
    with _Timer(rep, "ahss"):
        if tw.kind == "integral":
            E2, Ef, report = integral_ahss(K, tw)
            rep.checks["d squared zero"] = bool(report["d_squared_zero"])
            plist = [(None, E2, Ef)]
            rep.notes.append(f"degenerates at E_2: {bool(report['degenerates_at_E2'])}")
        else:
            plist = []
            for par in ("ev", "odd"):
                E2, Ef, report = differential_ahss(K, tw, par)
                rep.checks[f"d squared zero ({par})"] = bool(report["d_squared_zero"])
                plist.append((par, E2, Ef))
    for par, E2, Ef in plist:
        pages += [E2.to_dict(), Ef.to_dict()]
        if args.pages:
            rep.extra.setdefault("page_lines", []).extend(page_table(E2) + page_table(Ef))
        if any(E.extrapolated for E in (E2, Ef)):
            rep.notes.append(f"{par or 'integral'}: some entries extend the drawn pattern (marked extrapolated)")
    if args.pages:
        rep.extra["pages"] = pages
    with _Timer(rep, "abutment"):
        for par in ("ev", "odd"):
            Ef = plist[0][2] if plist[0][0] is None else next(E for p, _, E in plist if p == par)
            rep.add(par, assemble_abutment(Ef, par))
    rep.provenance.append(f"E_{plist[0][2].r} page, positional convergence")


def cmd_cdga(args, rep: Report):
    A = load_cdga(args.model)
    rep.request["model_name"] = A.name
    with _Timer(rep, "axioms"):
        for k, ok in A.check().items():
            rep.checks[k] = bool(ok)
    with _Timer(rep, "cohomology"):
        if args.twist_form:
            ev, odd = twisted_cohomology(A, args.twist_form)
            rep.add("ev", DiffCohGroup(vector_dim=ev))
            rep.add("odd", DiffCohGroup(vector_dim=odd))
            rep.provenance.append(f"d + ({args.twist_form}) on the parity-graded model")
        else:
            for p, dim in A.cohomology_dims().items():
                rep.add(f"H^{p}", DiffCohGroup(vector_dim=dim))
            rep.provenance.append("graded model cohomology")
    rep.notes.append(f"truncated above degree {A.cap}")


def cmd_check(args, rep: Report):
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(['all', *SUITES])}")
    with _Timer(rep, args.suite):
        rep.checks.update(run_suite(args.suite))
    rep.provenance.append(f"{len(rep.checks)} cases, {thread_cap()} worker(s)")


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    """Usage errors share exit status 1 with other parse errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="deligne-lab", description="Exact (twisted, differential) cohomology of finite simplicial complexes.")
    ap.add_argument("--json", action="store_true", help="emit a JSON report on stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cohomology", help="ordinary cohomology")
    p.add_argument("space")
    p.add_argument("--coeff", choices=("z", "q", "qz"), default="z")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--degree", type=int)
    g.add_argument("--periodic", choices=("ev", "odd"))
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("deligne", help="differential (Deligne) cohomology")
    p.add_argument("space")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--weight", type=int)
    g.add_argument("--periodic", choices=("ev", "odd"))
    p.add_argument("--check-diamond", action="store_true")
    p.set_defaults(func=cmd_deligne)

    p = sub.add_parser("twisted", help="twisted periodic cohomology")
    p.add_argument("space")
    p.add_argument("--twist", required=True, help="corpus name, twist file or inline description")
    p.add_argument("--via", choices=("direct", "ahss", "both"), help="default: direct, falling back to the AHSS when obstructed")
    p.set_defaults(func=cmd_twisted)

    p = sub.add_parser("ahss", help="Atiyah-Hirzebruch spectral sequence")
    p.add_argument("space")
    p.add_argument("--twist", required=True)
    p.add_argument("--pages", action="store_true")
    p.set_defaults(func=cmd_ahss)

    p = sub.add_parser("cdga", help="rational model calculations")
    p.add_argument("model", help="sphere(n) or a model file")
    p.add_argument("--twist-form")
    p.set_defaults(func=cmd_cdga)

    p = sub.add_parser("check", help="run an invariant suite")
    p.add_argument("suite", help=f"one of: all, {', '.join(SUITES)}")
    p.set_defaults(func=cmd_check)
    return ap


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "json")}


def run(argv: list[str] | None = None) -> tuple[int, Report]:
    argv = sys.argv[1:] if argv is None else list(argv)
    # --json is accepted anywhere on the line
    args = build_parser().parse_args([a for a in argv if a != "--json"])
    rep = Report(args.command, {"argv": [a for a in argv if a != "--json"], **_echo(args)})
    try:
        args.func(args, rep)
    except SpaceParseError as e:
        rep.status = EXIT_PARSE
        rep.error = {"type": type(e).__name__, "message": str(e), "line": e.line}
    except (UsageError, NotACocycle, BadDecomposition, WeightMismatch, FileNotFoundError) as e:
        rep.status = EXIT_PARSE
        rep.error = {"type": type(e).__name__, "message": str(e), "line": None}
    except ObstructionNonzero as e:
        rep.status = EXIT_PRECONDITION
        rep.error = {"type": type(e).__name__, "message": str(e), "certificate": _certificate(e.certificate)}
    except (NotClosed, NotOdd, NotEven) as e:
        rep.status = EXIT_PRECONDITION
        rep.error = {"type": type(e).__name__, "message": str(e), "certificate": str(e)}
    except NotConverged as e:
        rep.status = EXIT_AMBIGUOUS
        rep.error = {"type": type(e).__name__, "message": str(e)}
    if rep.status == EXIT_OK:
        if any(isinstance(g, Ambiguous) for g in rep.results.values()):
            rep.status = EXIT_AMBIGUOUS
        elif not all(rep.checks.values()):
            rep.status = EXIT_CHECK
    return rep.status, rep


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    status, rep = run(argv)
    if "--json" in argv:
        print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    else:
        print(rep.text(), file=sys.stdout if status == EXIT_OK else sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
