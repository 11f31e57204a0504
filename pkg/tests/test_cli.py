import json
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deligne_lab import cli
from deligne_lab.cli import EXIT_AMBIGUOUS, EXIT_CHECK, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, Report, group_from_dict, group_to_dict, main, run
from deligne_lab.groups import Ambiguous, DiffCohGroup, FgAbGroup

TORUS = "product(circle(3),circle(3))"
TORUS_TWIST = """kind: integral
degree: 1
c: {((0,0),(0,1)): 1, ((0,1),(1,1)): -1, ((0,1),(2,1)): -1, ((1,1),(1,2)): 1, ((1,1),(2,2)): 1, ((2,1),(2,2)): 1}
"""


def js(capsys, *argv):
    code = main([*argv, "--json"])
    return code, json.loads(capsys.readouterr().out)


def G(v=0, t=0, l=0, f=()):
    return {"vector_dim": v, "torus_rank": t, "lattice_rank": l, "finite_factors": list(f)}


def test_twisted_both_paths(capsys):
    code, d = js(capsys, "twisted", "sphere(3)", "--twist", "h3_scale2", "--via", "both")
    assert code == EXIT_OK
    assert d["results"] == {"ev": G(), "odd": G(f=[2])}
    assert d["checks"] == {"paths agree": True}
    assert len(d["provenance"]) == 2


def test_deligne_even_sphere(capsys):
    code, d = js(capsys, "deligne", "sphere(2)", "--periodic", "ev")
    assert code == EXIT_OK
    assert d["results"]["ev"] == G(v=3, l=2)
    assert all(d["checks"].values())


def test_cohomology_circle(capsys):
    code, d = js(capsys, "cohomology", "circle(6)", "--coeff", "z", "--degree", "1")
    assert code == EXIT_OK
    assert list(d["results"].values()) == [G(l=1)]


@pytest.mark.parametrize("coeff, want", [("q", G(v=1)), ("qz", G(t=1))])
def test_cohomology_other_coefficients(capsys, coeff, want):
    code, d = js(capsys, "cohomology", "sphere(2)", "--coeff", coeff, "--degree", "2")
    assert code == EXIT_OK and list(d["results"].values()) == [want]


def test_deligne_weight(capsys):
    code, d = js(capsys, "deligne", "circle(4)", "--weight", "1")
    assert code == EXIT_OK
    assert list(d["results"].values()) == [G(v=3, t=1, l=1)]


def test_deligne_diamond(capsys):
    code, d = js(capsys, "deligne", "sphere(2)", "--periodic", "odd", "--check-diamond")
    assert code == EXIT_OK and d["checks"] and all(d["checks"].values())


def test_sign_twist_file(capsys, tmp_path):
    f = tmp_path / "eps.twist"
    f.write_text("kind: sign\neps: {(0, 1): -1}\n")
    code, d = js(capsys, "twisted", "circle(6)", "--twist", str(f), "--via", "both")
    assert code == EXIT_OK
    assert d["results"] == {"ev": G(), "odd": G(f=[2])}


def test_ahss_pages(capsys):
    code, d = js(capsys, "ahss", "sphere(3)", "--twist", "h3_scale3", "--pages")
    assert code == EXIT_OK
    assert d["results"]["odd"] == G(f=[3])
    assert d["extra"]["pages"]


def test_ahss_differential(capsys):
    code, d = js(capsys, "ahss", "sphere(3)", "--twist", "hhat3_scale2")
    assert code == EXIT_OK
    assert d["results"]["odd"]["finite_factors"] == [2]


def test_cdga(capsys):
    code, d = js(capsys, "cdga", "sphere(3)", "--twist-form", "2*x")
    assert code == EXIT_OK
    assert d["results"] == {"ev": G(), "odd": G()}


def test_obstructed_auto_falls_back(capsys, tmp_path):
    f = tmp_path / "t.twist"
    f.write_text(TORUS_TWIST)
    code, d = js(capsys, "twisted", TORUS, "--twist", str(f))
    assert code == EXIT_OK
    assert d["results"] == {"ev": G(), "odd": G()}
    assert "obstruction" in d["extra"]


@pytest.mark.parametrize("via", ["direct", "both"])
def test_obstructed_direct_exits_2(capsys, tmp_path, via):
    f = tmp_path / "t.twist"
    f.write_text(TORUS_TWIST)
    code, d = js(capsys, "twisted", TORUS, "--twist", str(f), "--via", via)
    assert code == EXIT_PRECONDITION
    assert d["error"]["type"] == "ObstructionNonzero"
    assert d["error"]["certificate"]


def test_precondition_on_twist_form(capsys):
    code, d = js(capsys, "cdga", "sphere(2)", "--twist-form", "x")
    assert code == EXIT_PRECONDITION and d["error"]["type"] == "NotOdd"


@pytest.mark.parametrize(
    "argv",
    [
        ["cohomology", "sphere("],
        ["twisted", "sphere(3)", "--twist", "no_such_name"],
        ["ahss", "sphere(3)", "--twist", "hexagon_sign"],
        ["check", "nonsense"],
        ["deligne", "sphere(2)", "--weight", "-1"],
        ["twisted", "sphere(3)"],
        ["frobnicate"],
    ],
)
def test_parse_errors_exit_1(argv, capsys):
    # argparse usage errors leave through SystemExit
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    assert code == EXIT_PARSE


def test_twist_error_has_line(capsys, tmp_path):
    f = tmp_path / "bad.twist"
    f.write_text("kind: integral\ndegree: 3\nc: {(0, 1, 2): 1}\n")
    code, d = js(capsys, "twisted", "sphere(3)", "--twist", str(f))
    assert code == EXIT_PARSE
    assert "line 3" in d["error"]["message"]


def test_ambiguous_exit_3(monkeypatch, capsys):
    amb = Ambiguous(FgAbGroup.from_orders(0, [2]).as_diff(), FgAbGroup.from_orders(0, [2]), None, "test")
    monkeypatch.setattr(cli, "assemble_abutment", lambda page, parity=None: amb)
    code, d = js(capsys, "ahss", "sphere(3)", "--twist", "h3_scale2")
    assert code == EXIT_AMBIGUOUS
    assert d["results"]["ev"]["ambiguous"]


def test_failed_check_exit_4(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_suite", lambda name: {"parity: forced": False})
    assert main(["check", "parity"]) == EXIT_CHECK


def test_check_suite(capsys):
    code, d = js(capsys, "check", "parity")
    assert code == EXIT_OK and d["checks"] and all(d["checks"].values())


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("DELIGNE_LAB_THREADS", "3")
    assert cli.thread_cap() == 3
    monkeypatch.setenv("DELIGNE_LAB_THREADS", "junk")
    assert cli.thread_cap() == 1


def test_schema_stable(capsys):
    keys = None
    for argv in (["cohomology", "point()"], ["cdga", "sphere(2)"], ["twisted", "sphere(3)", "--twist", "h3_scale2"]):
        _, d = js(capsys, *argv)
        assert keys is None or set(d) == keys
        keys = set(d)


def test_report_round_trip():
    _, rep = run(["twisted", "sphere(3)", "--twist", "h3_scale5", "--via", "both"])
    d = rep.to_dict()
    assert Report.from_dict(json.loads(json.dumps(d))).to_dict() == d


def _chain(steps):
    out, f = [], 1
    for s in steps:
        f *= s
        out.append(f)
    return tuple(out)


groups = st.builds(DiffCohGroup, st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), st.lists(st.integers(2, 6), max_size=4).map(_chain))


@given(groups)
def test_descriptor_round_trip(g):
    assert group_from_dict(json.loads(json.dumps(group_to_dict(g)))) == g


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "deligne_lab", "cohomology", "circle(6)", "--degree", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "Z" in out.stdout
