import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import space
from deligne_lab.groups import DiffCohGroup, FgAbGroup, Subgroup, quotient_descriptor
from deligne_lab.linalg import ExactMatrix
from deligne_lab.simplicial import (
    BadCover,
    Cochain,
    NotACocycle,
    SignCocycle,
    SimplicialComplex,
    SpaceParseError,
    build_product,
    build_sphere,
    cech_double_complex,
    circle,
    coboundary,
    cochain_complex,
    cohomology,
    cup,
    load_space,
    local_system_complex,
    parse_space,
    point,
    projection,
    total_cohomology,
    u1_cohomology,
    u1_subquotient,
)

Z, ZERO = FgAbGroup(1), FgAbGroup()


def padded(gs, n):
    """Drop trailing zero groups, then pad to length n."""
    gs = list(gs)
    while len(gs) > n and gs[-1] == ZERO:
        gs.pop()
    return gs + [ZERO] * (n - len(gs))


# --------------------------------------------------------------------------
# builders


@pytest.mark.parametrize(
    "n, fvec",
    [(1, (3, 3)), (2, (4, 6, 4)), (3, (5, 10, 10, 5))],
)
def test_sphere_f_vectors(n, fvec):
    assert build_sphere(n).f_vector == fvec


def test_sphere_f_vector_binomial_oracle():
    from math import comb

    for n in range(1, 7):
        assert build_sphere(n).f_vector == tuple(comb(n + 2, k + 1) for k in range(n + 1))


def test_point_product_is_identity():
    K = build_sphere(2)
    P = build_product(point(), K)
    assert P.f_vector == K.f_vector
    assert cohomology(P) == cohomology(K)


def test_torus_cohomology():
    assert cohomology(space("T2")) == [Z, FgAbGroup(2), Z]


def test_s1_times_s2_cohomology():
    assert cohomology(space("S1xS2")) == [Z, Z, Z, Z]


def test_product_vertex_order_is_lexicographic():
    P = build_product(circle(3), circle(3))
    assert list(P.vertices) == sorted(P.vertices)


# --------------------------------------------------------------------------
# coboundary


def test_triangle_incidence():
    d0 = coboundary(circle(3), 0)
    assert d0.shape == (3, 3)
    assert all(x in (-1, 0, 1) for row in d0.entries for x in row)
    assert all(sorted(row) == [-1, 0, 1] for row in d0.entries)


def test_coboundary_above_dimension_is_empty():
    d = coboundary(build_sphere(2), 5)
    assert d.shape[1] == 0


def test_tetrahedron_degree_one():
    K = build_sphere(2)
    d1, d0 = coboundary(K, 1), coboundary(K, 0)
    assert d1.shape == (4, 6)
    assert (d1 @ d0).is_zero()


@pytest.mark.parametrize("name", ["S1", "S2", "S3", "T2", "S1xS2", "disk"])
def test_delta_squared_zero(name):
    K = space(name)
    for p in range(K.dim):
        assert (coboundary(K, p + 1) @ coboundary(K, p)).is_zero()


# --------------------------------------------------------------------------
# cup products


def _rand(K, p, rng, kind="Z"):
    return Cochain(K, p, tuple(rng.randint(-4, 4) for _ in range(K.n_simplices(p))), kind)


@given(st.sampled_from(["S2", "T2", "disk", "S3"]), st.integers(0, 3), st.integers(0, 3), st.integers(0, 10**6))
def test_cup_leibniz(name, p, q, seed):
    K = space(name)
    if p + q > K.dim:
        return
    rng = random.Random(seed)
    a, b = _rand(K, p, rng), _rand(K, q, rng)
    sign = -1 if p % 2 else 1
    assert cup(a, b).coboundary() == cup(a.coboundary(), b) + cup(a, b.coboundary()).scale(sign)


def test_unit_cup():
    K = space("T2")
    b = _rand(K, 1, random.Random(3))
    assert cup(Cochain.constant(K, 1), b) == b


def test_circle_generator_squares_to_zero():
    K = circle(3)
    a = Cochain(K, 1, (0, 0, 1), "Z")
    assert cup(a, a).is_zero() and cup(a, a).degree == 2


def _torus_generators():
    T = space("T2")
    gens = []
    for f in (0, 1):
        pr = projection(T, f)
        C = pr.L
        g = Cochain(C, 1, (0,) * (C.n_simplices(1) - 1) + (1,), "Z")
        gens.append(pr.pullback(g))
    return T, gens


def test_torus_cup_of_generators_generates_top():
    T, (a, b) = _torus_generators()
    ab = cup(a, b)
    assert ab.coboundary().is_zero()
    d1 = coboundary(T, 1, "Q")
    ints = Subgroup.integer_points(T.n_simplices(2))
    B = Subgroup.integer_points(T.n_simplices(1)).image(d1.q)
    # Z^2(T; Z) / (B + Z ab) is trivial exactly when [ab] generates H^2 = Z
    assert quotient_descriptor(ints, B + Subgroup(T.n_simplices(2), lattice=[list(ab.values)])).is_trivial()


def _is_coboundary(K, c):
    d = coboundary(K, c.degree - 1, "Q")
    B = Subgroup.integer_points(d.cols).image(d.q)
    return Subgroup(c.K.n_simplices(c.degree), lattice=[list(c.values)]) <= B


@given(st.integers(0, 10**6))
def test_cup_graded_commutative_on_classes(seed):
    rng = random.Random(seed)
    T, (a, b) = _torus_generators()
    a = a + _rand(T, 0, rng).coboundary()
    b = b + _rand(T, 0, rng).coboundary()
    # p = q = 1: a.b + b.a must be a coboundary
    assert _is_coboundary(T, cup(a, b) + cup(b, a))


# --------------------------------------------------------------------------
# local systems


def _hexagon_eps():
    H = space("hexagon")
    return H, SignCocycle(H, {(0, 1): -1})


def test_trivial_local_system_is_ordinary():
    K = space("T2")
    eps = SignCocycle(K)
    for p in range(K.dim + 1):
        assert local_system_complex(K, eps).d(p) == coboundary(K, p)


def test_hexagon_sign_twist():
    H, eps = _hexagon_eps()
    assert local_system_complex(H, eps).all_cohomology() == [ZERO, FgAbGroup(0, (2,))]


def test_hexagon_sign_twist_brute_force_snf():
    from deligne_lab.linalg import invariant_factors

    H, eps = _hexagon_eps()
    M = local_system_complex(H, eps).d(0)
    assert M.shape == (6, 6)
    assert invariant_factors(M) == [1, 1, 1, 1, 1, 2]


def test_rim_only_sign_on_disk_is_not_a_cocycle():
    D = space("disk")
    with pytest.raises(NotACocycle):
        SignCocycle(D, {(0, 1): -1})


def test_gauge_trivial_sign_on_disk():
    D = space("disk")
    signs = [1] * len(D.vertices)
    signs[D.position(1)] = -1
    eps = SignCocycle(D).gauge(signs)
    assert eps.eps(D.position(0), D.position(1)) == -1
    assert padded(local_system_complex(D, eps).all_cohomology(), 3) == [Z, ZERO, ZERO]


@given(st.sampled_from(["T2", "S2", "hexagon", "disk"]), st.integers(0, 10**6))
def test_gauge_equivalent_sign_cocycles_agree(name, seed):
    K = space(name)
    rng = random.Random(seed)
    eps = SignCocycle(K).gauge([rng.choice((1, -1)) for _ in K.vertices])
    C = local_system_complex(K, eps)
    assert C.is_complex()
    assert C.all_cohomology() == cohomology(K)


def test_pulled_back_sign_on_torus():
    T = space("T2")
    pr = projection(T, 0)
    C = pr.L
    e = C.labels(C.simplices[1][-1])
    eps_c = SignCocycle(C, {e: -1})
    vals = {}
    for s in T.simplices[1]:
        a, b = (pr.vmap[i] for i in s)
        vals[T.labels(s)] = 1 if a == b else eps_c.eps(min(a, b), max(a, b))
    eps = SignCocycle(T, vals)
    # Kunneth with local coefficients: H(S^1; Z_-) (x) H(S^1) = (0, Z/2) (x) (Z, Z)
    assert local_system_complex(T, eps).all_cohomology() == [ZERO, FgAbGroup(0, (2,)), FgAbGroup(0, (2,))]


def test_sign_values_validated():
    H = space("hexagon")
    with pytest.raises(NotACocycle):
        SignCocycle(H, {(0, 1): 2})
    with pytest.raises(NotACocycle):
        SignCocycle(H, {(0, 3): -1})


# --------------------------------------------------------------------------
# Cech double complex


def test_cech_tetrahedron_boundary():
    assert padded(total_cohomology(cech_double_complex(space("S2"))), 3) == [Z, ZERO, Z]


def test_cech_single_simplex():
    assert padded(total_cohomology(cech_double_complex(space("edge"))), 3) == [Z, ZERO, ZERO]


def test_cech_hexagon():
    assert padded(total_cohomology(cech_double_complex(space("hexagon"))), 2) == [Z, Z]


@pytest.mark.parametrize("name", ["point", "S1", "hexagon", "S2", "S3", "S4", "T2", "disk", "edge"])
def test_cech_matches_direct(name):
    K = space(name)
    a, b = total_cohomology(cech_double_complex(K)), cohomology(K)
    n = max(len(a), len(b))
    assert padded(a, n) == padded(b, n)


def test_cech_double_complex_squares_to_zero():
    assert cech_double_complex(space("T2")).total.is_complex()


def test_cech_rejects_bad_cover():
    K = space("hexagon")
    cover = {v: {s for s in K._faceset if v in s} for v in range(len(K.vertices))}
    cover[0] = cover[0] | cover[3]
    with pytest.raises(BadCover):
        cech_double_complex(K, cover=cover)


# --------------------------------------------------------------------------
# Q/Z coefficients


def test_u1_examples():
    assert u1_cohomology(space("S2"), 2) == DiffCohGroup(torus_rank=1)
    assert u1_cohomology(space("S3"), 2) == DiffCohGroup()
    assert u1_cohomology(space("T2"), 0) == DiffCohGroup(torus_rank=1)


@pytest.mark.parametrize("name", ["point", "S1", "S2", "S3", "T2", "disk"])
def test_u1_closed_form_matches_subquotient(name):
    K = space(name)
    for n in range(K.dim + 1):
        assert u1_subquotient(K, n).descriptor() == u1_cohomology(K, n)


RP2 = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5), (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5)]


def test_projective_plane_torsion():
    K = SimplicialComplex(range(6), RP2, "RP2")
    assert cohomology(K) == [Z, ZERO, FgAbGroup(0, (2,))]
    assert u1_cohomology(K, 1) == DiffCohGroup(finite_factors=(2,))
    for n in range(3):
        assert u1_subquotient(K, n).descriptor() == u1_cohomology(K, n)


# --------------------------------------------------------------------------
# space files


def test_parse_space_file_form():
    K = parse_space("name: tri\nvertices: [0, 1, 2]\nfacets: [[0, 1], [1, 2], [0, 2]]\n")
    assert cohomology(K) == [Z, Z]


def test_parse_space_macros():
    assert load_space("product(circle(3), circle(4))").f_vector == build_product(circle(3), circle(4)).f_vector
    assert load_space("sphere(2)").f_vector == (4, 6, 4)


def test_parse_space_rejects_face_of_facet():
    with pytest.raises(SpaceParseError) as ei:
        parse_space("vertices: [0, 1, 2]\nfacets: [[0, 1, 2], [0, 1]]")
    assert ei.value.line == 2


def test_parse_space_rejects_unknown_vertex():
    with pytest.raises(SpaceParseError) as ei:
        parse_space("vertices: [0, 1]\n\nfacets: [[0, 7]]")
    assert ei.value.line == 3 and "7" in str(ei.value)


def test_parse_space_missing_key():
    with pytest.raises(SpaceParseError):
        parse_space("vertices: [0, 1]")


def test_parse_space_bad_macro():
    with pytest.raises(SpaceParseError):
        load_space("sphere(0)")
    with pytest.raises(SpaceParseError):
        load_space("circle(x)")
