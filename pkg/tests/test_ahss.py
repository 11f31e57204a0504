import random

import pytest

from conftest import space
from deligne_lab.ahss import NotConverged, SSPage, assemble_abutment, differential_ahss, integral_ahss, page_table
from deligne_lab.groups import Ambiguous, DiffCohGroup, FgAbGroup, SubQuotient
from deligne_lab.simplicial import Cochain, cohomology
from deligne_lab.twisted import Twist, differential_twist, top_generator, twisted_deligne_cohomology, twisted_periodic_cohomology

ZERO = FgAbGroup()


def Zmod(h):
    return FgAbGroup.from_orders(0, [h])


def itw(K, h):
    return Twist.integral(top_generator(K, K.dim, h))


def dtw(K, h, eta=None):
    return Twist.differential(differential_twist(top_generator(K, K.dim, h), eta))


def test_s3_h2_final_page():
    K = space("S3")
    E2, E4, rep = integral_ahss(K, itw(K, 2))
    assert E4.r == 4
    assert E4.descriptor((0, 0, "Z")).is_trivial()
    assert E4.descriptor((3, 1, "Z")) == Zmod(2).as_diff()
    assert rep["converged"] is True and rep["d_squared_zero"]
    assert rep["degenerates_at_E2"] is False
    assert set(rep["pages"]) == {2, 4}


@pytest.mark.parametrize("name", ["S2", "S4"])
def test_even_sphere_degenerates(name):
    K = space(name)
    E2, Ef, rep = integral_ahss(K, None)
    assert rep["degenerates_at_E2"] is True
    assert assemble_abutment(Ef, "ev") == FgAbGroup(2)
    assert assemble_abutment(Ef, "odd") == ZERO


def test_torus_untwisted():
    E2, Ef, rep = integral_ahss(space("T2"))
    assert assemble_abutment(Ef, "ev") == FgAbGroup(2)
    assert assemble_abutment(Ef, "odd") == FgAbGroup(2)


def test_e2_is_ordinary_cohomology():
    K = space("S1xS2")
    E2, _, _ = integral_ahss(K)
    H = cohomology(K)
    for p in range(K.dim + 1):
        assert E2.descriptor((p, p % 2, "Z")) == H[p].as_diff()


@pytest.mark.parametrize("h", [1, 2, 3, 6])
@pytest.mark.parametrize("name", ["S3", "S5"])
def test_integral_abutment_matches_direct(name, h):
    K = space(name)
    tw = itw(K, h)
    _, Ef, _ = integral_ahss(K, tw)
    assert (assemble_abutment(Ef, "ev"), assemble_abutment(Ef, "odd")) == twisted_periodic_cohomology(K, tw)


def test_integral_rejects_other_kinds():
    K = space("S3")
    with pytest.raises(ValueError):
        integral_ahss(K, dtw(K, 2))
    with pytest.raises(ValueError):
        differential_ahss(K, itw(K, 2), "ev")
    with pytest.raises(ValueError):
        differential_ahss(K, None, "both")


@pytest.mark.parametrize("h", [2, 3, 4])
def test_flat_kernel_has_order_h(h):
    K = space("S3")
    _, Ef, rep = differential_ahss(K, dtw(K, h), "odd")
    assert rep["d_squared_zero"]
    assert Ef.descriptor((0, 0, "flat")) == DiffCohGroup(finite_factors=(h,))


@pytest.mark.parametrize("h", [1, 2, 5])
@pytest.mark.parametrize("name", ["S3", "S5"])
def test_differential_abutment_matches_direct(name, h):
    K = space(name)
    tw = dtw(K, h)
    direct = twisted_deligne_cohomology(K, tw)
    got = []
    for par in ("ev", "odd"):
        _, Ef, rep = differential_ahss(K, tw, par)
        assert rep["converged"] is True
        got.append(assemble_abutment(Ef, par))
    assert tuple(got) == direct


@pytest.mark.parametrize("name", ["S1", "S2", "T2"])
def test_differential_untwisted_matches_direct(name):
    K = space(name)
    direct = twisted_deligne_cohomology(K, None)
    for i, par in enumerate(("ev", "odd")):
        _, Ef, _ = differential_ahss(K, None, par)
        assert assemble_abutment(Ef, par) == direct[i]


def test_cohomologous_twists_same_pages():
    K = space("S3")
    rng = random.Random(5)
    b = Cochain(K, 2, tuple(rng.randint(-2, 2) for _ in range(K.n_simplices(2))), "Z")
    h = top_generator(K, 3, 3)
    a = integral_ahss(K, Twist.integral(h))[1].descriptors()
    c = integral_ahss(K, Twist.integral(h + b.coboundary()))[1].descriptors()
    assert a == c


def test_extension_ambiguity_reported():
    page = SSPage(4, {(1, 1, "Z"): SubQuotient.cyclic(2), (3, 1, "Z"): SubQuotient.cyclic(2)}, converged=True)
    out = assemble_abutment(page, "odd")
    assert isinstance(out, Ambiguous)
    assert set(out.candidates) == {Zmod(4).as_diff(), FgAbGroup.from_orders(0, [2, 2]).as_diff()}
    assert "associated graded" in out.reason


def test_single_entry_abutment():
    page = SSPage(4, {(3, 1, "Z"): SubQuotient.cyclic(5)}, converged=True)
    assert assemble_abutment(page, "odd") == Zmod(5)
    assert assemble_abutment(page, "ev") == ZERO


def test_unconverged_page_refused():
    page = SSPage(4, {(0, 0, "Z"): SubQuotient.cyclic(2)}, converged=None)
    with pytest.raises(NotConverged):
        assemble_abutment(page, "ev")


def test_page_table_flags_extrapolation():
    K = space("S5")
    E2, _, _ = differential_ahss(K, dtw(K, 2), "odd")
    lines = page_table(E2)
    assert lines[0].startswith("E_2 (differential, odd")
    assert any("[extrapolated]" in ln for ln in lines) == bool(E2.extrapolated)
