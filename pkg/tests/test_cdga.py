from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import space
from deligne_lab.cdga import (
    Cdga,
    CdgaParseError,
    NotClosed,
    NotEven,
    NotOdd,
    cs_series,
    exp_element,
    exp_gauge,
    free_cdga,
    load_cdga,
    parse_cdga,
    sullivan_sphere,
    twisted_cohomology,
    verify_cs_homotopy,
    verify_gauge,
)
from deligne_lab.twisted import Twist, top_generator, twisted_periodic_cohomology

small = st.integers(-4, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_sphere_model_cohomology(n):
    assert sullivan_sphere(n).cohomology_dims() == {0: 1, n: 1}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sphere_model_axioms(n):
    assert all(sullivan_sphere(n).check().values())


def test_products_and_signs():
    A = free_cdga([("a", 1), ("b", 1), ("x", 2)], {}, 6)
    a, b, x = A.gen("a"), A.gen("b"), A.gen("x")
    assert A.mul(a, a) == {}
    assert A.mul(a, b) == A.scale(-1, A.mul(b, a))
    assert A.mul(x, a) == A.mul(a, x)
    assert A.parse("a*b + 2*x") == A.add(A.mul(a, b), A.scale(2, x))


def test_cap_truncates():
    A = free_cdga([("x", 2)], {}, 5)
    assert A.pow(A.gen("x"), 3) == {}
    assert A.cohomology_dims() == {0: 1, 2: 1, 4: 1}


@pytest.mark.parametrize("n", [1, 3, 5])
def test_odd_sphere_untwisted(n):
    assert twisted_cohomology(sullivan_sphere(n), "0") == (1, 1)


@pytest.mark.parametrize("n", [2, 4])
def test_even_sphere_untwisted(n):
    assert twisted_cohomology(sullivan_sphere(n), "0") == (2, 0)


@pytest.mark.parametrize("h", [1, 2, 7])
def test_odd_sphere_twist_kills_everything(h):
    A = sullivan_sphere(3)
    assert twisted_cohomology(A, f"{h}*x") == (0, 0)
    # the rational rank agrees with the integral complex on a triangulation
    K = space("S3")
    ev, odd = twisted_periodic_cohomology(K, Twist.integral(top_generator(K, 3, h)))
    assert (ev.free_rank, odd.free_rank) == (0, 0)


def test_twist_form_preconditions():
    A = sullivan_sphere(2)
    with pytest.raises(NotOdd):
        twisted_cohomology(A, "x")
    with pytest.raises(NotClosed):
        twisted_cohomology(A, "y")


def test_exp_inverse():
    A = sullivan_sphere(2, 12)
    B = A.parse("3*x")
    assert A.mul(exp_element(A, B), exp_element(A, A.scale(-1, B))) == A.one()
    with pytest.raises(NotEven):
        exp_element(A, A.parse("y"))
    with pytest.raises(NotEven):
        exp_element(A, A.parse("1 + x"))


def test_gauge_with_exact_shift():
    F = parse_cdga("generators: b:2, h:3\ncap: 13\nd(b) = h")
    rep = verify_gauge(F, "h", "b")
    assert rep.inverse_ok and rep.conjugation_ok
    assert rep.dB_equals_H and rep.chain_map_ok and rep.passed


def test_gauge_without_exact_shift():
    F = free_cdga([("b", 2), ("h", 3)], {}, 13)
    rep = verify_gauge(F, "h", "b")
    assert rep.conjugation_ok and not rep.dB_equals_H and not rep.chain_map_ok
    assert rep.passed


@given(small, small)
def test_gauge_property(p, q):
    F = parse_cdga("generators: b:2, h:3\ncap: 13\nd(b) = h")
    B = F.add(F.scale(p, F.gen("b")), F.scale(q, F.pow(F.gen("b"), 2)))
    H = F.scale(p, F.gen("h"))
    rep = verify_gauge(F, H, B)
    assert rep.inverse_ok and rep.conjugation_ok
    assert rep.dB_equals_H == (q == 0)
    op = exp_gauge(F, B)
    assert op(F.one()) == exp_element(F, B)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cs_on_sphere_models(n):
    A = sullivan_sphere(n, 12)
    assert verify_cs_homotopy(A, A.names[-1]).passed


@given(small, small)
def test_cs_property(p, q):
    F = parse_cdga("generators: a:1, c:3, x:2\ncap: 10\nd(a) = x")
    a = F.add(F.scale(p, F.gen("a")), F.scale(q, F.gen("c")))
    rep = verify_cs_homotopy(F, a)
    assert rep.passed


def test_cs_series_terms():
    F = parse_cdga("generators: a:1, x:2\ncap: 8\nd(a) = x")
    cs = cs_series(F, "a")
    assert cs == F.add(F.gen("a"), F.scale(Fraction(1, 2), F.parse("a*x")), F.scale(Fraction(1, 6), F.parse("a*x^2")),
                       F.scale(Fraction(1, 24), F.parse("a*x^3")))
    with pytest.raises(NotOdd):
        cs_series(F, "x")


def test_load_sphere_spec():
    assert load_cdga("sphere(4)").names == ["x", "y"]
    assert load_cdga("sullivan_sphere(3)").names == ["x"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("generators: x:2\nbogus", 2),
        ("name: A\ngenerators: x", 2),
        ("generators: x:2\ncap: many", 2),
        ("generators: x:2, y:3\nd(y) = x", 2),
        ("generators: x:2, y:3\nd(z) = x^2", 2),
        ("generators: x:2, y:3\nd(y) = x^2\nd(y) = 0", 3),
        ("generators: x:2, y:3\n\nd(y) = x^2 +", 3),
        ("name: empty", 1),
    ],
)
def test_parse_errors_have_lines(text, line):
    with pytest.raises(CdgaParseError) as ei:
        parse_cdga(text)
    assert ei.value.line == line


def test_inconsistent_differential():
    with pytest.raises(CdgaParseError):
        parse_cdga("generators: a:1, b:2\nd(a) = b\nd(b) = a*b")


def test_constructor_rejects_bad_data():
    with pytest.raises(ValueError):
        Cdga([("x", 2), ("x", 3)])
    with pytest.raises(ValueError):
        Cdga([("x", 0)])
