from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deligne_lab.groups import (
    Ambiguous,
    CompositionMismatch,
    DiffCohGroup,
    FgAbGroup,
    GroupMap,
    NotAComplex,
    SubQuotient,
    Subgroup,
    check_exact,
    cohomology_at,
    extension_candidates,
    quotient_descriptor,
    resolve_extension,
)
from deligne_lab.linalg import ExactMatrix, invariant_factors, smith_normal_form
from deligne_lab.simplicial import build_sphere, coboundary


def Z(n=1):
    return FgAbGroup(n)


# --------------------------------------------------------------------------
# Smith normal form


def test_snf_of_zero():
    S, U, V = smith_normal_form(ExactMatrix([[0]]))
    assert S.entries == [[0]] and U.entries == [[1]] and V.entries == [[1]]


def test_snf_two_by_two():
    A = ExactMatrix([[2, 4], [6, 8]])
    S, U, V = smith_normal_form(A)
    assert S.entries == [[2, 0], [0, 4]]
    assert U @ A @ V == S


def test_snf_identity():
    I = ExactMatrix.identity(4)
    assert smith_normal_form(I)[0] == I


small_int = st.integers(-6, 6)


@st.composite
def int_matrices(draw, max_side=5):
    r = draw(st.integers(1, max_side))
    c = draw(st.integers(1, max_side))
    return ExactMatrix(draw(st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)))


@given(int_matrices())
def test_snf_reconstructs_and_is_unimodular(A):
    S, U, V = smith_normal_form(A)
    assert U @ A @ V == S
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [S[i, i] for i in range(min(S.shape))]
    assert all(S[i, j] == 0 for i in range(S.rows) for j in range(S.cols) if i != j)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert diag[len(nz):] == [0] * (len(diag) - len(nz))


@given(int_matrices())
def test_invariant_factors_match_snf(A):
    S = smith_normal_form(A)[0]
    diag = [abs(S[i, i]) for i in range(min(S.shape)) if S[i, i]]
    assert invariant_factors(A) == diag


# --------------------------------------------------------------------------
# cohomology at a spot


def test_cohomology_at_trivial_complex():
    assert cohomology_at(ExactMatrix.zeros(1, 0), ExactMatrix.zeros(0, 1)) == Z()


def test_cohomology_at_forced_quotient():
    assert cohomology_at(ExactMatrix([[2]]), ExactMatrix.zeros(0, 1)) == FgAbGroup(0, (2,))


def test_cohomology_at_tetrahedron_boundary():
    K = build_sphere(2)
    assert cohomology_at(coboundary(K, 1), coboundary(K, 2)) == Z()


def test_cohomology_at_rejects_non_complex():
    with pytest.raises(NotAComplex):
        cohomology_at(ExactMatrix([[1]]), ExactMatrix([[1]]))


def test_cohomology_at_rational_kind_reports_dimension():
    g = cohomology_at(ExactMatrix([[2]], "Q"), ExactMatrix.zeros(0, 1, "Q"))
    assert g == FgAbGroup(0)


@pytest.mark.parametrize("n", range(1, 8))
def test_sphere_cohomology_against_binomial_oracle(n):
    K = build_sphere(n)
    groups = [cohomology_at(coboundary(K, p - 1) if p else ExactMatrix.zeros(K.n_simplices(0), 0), coboundary(K, p)) for p in range(n + 1)]
    assert groups == [Z()] + [FgAbGroup()] * (n - 1) + [Z()]


# --------------------------------------------------------------------------
# descriptors


def test_factor_chain_validated():
    with pytest.raises(ValueError):
        FgAbGroup(0, (4, 2))
    with pytest.raises(ValueError):
        DiffCohGroup(finite_factors=(1,))
    assert FgAbGroup.from_orders(0, [2, 3]) == FgAbGroup(0, (6,))


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4), st.lists(st.integers(2, 30), max_size=4))
def test_descriptor_round_trip(v, t, l, orders):
    g = DiffCohGroup(v, t, l) + FgAbGroup.from_orders(0, orders)
    assert DiffCohGroup.from_dict(g.to_dict()) == g


def test_quotient_descriptor_mixed():
    # (Q + Z) / (2Z) on the first axis: Q/2Z is Q/Z as a group, plus Z
    S = Subgroup(2, lattice=[[0, 1]], space=[[1, 0]])
    T = Subgroup(2, lattice=[[2, 0]])
    assert quotient_descriptor(S, T) == DiffCohGroup(0, 1, 1)


# --------------------------------------------------------------------------
# exactness checks


def _z(order=0):
    return SubQuotient.cyclic(order)


def test_check_exact_identity():
    G, H = _z(), _z()
    zero = SubQuotient.zero()
    chain = [
        GroupMap(zero, G, ExactMatrix.zeros(1, 0, "Q")),
        GroupMap(G, H, ExactMatrix([[1]], "Q")),
        GroupMap(H, SubQuotient.zero(), ExactMatrix.zeros(0, 1, "Q")),
    ]
    rep = check_exact(chain)
    assert rep.passed
    assert [j.node for j in rep.junctions] == [1, 2]


def test_check_exact_times_two():
    zero_in, zero_out = SubQuotient.zero(), SubQuotient.zero()
    A, B, C = _z(), _z(), _z(2)
    chain = [
        GroupMap(zero_in, A, ExactMatrix.zeros(1, 0, "Q")),
        GroupMap(A, B, ExactMatrix([[2]], "Q")),
        GroupMap(B, C, ExactMatrix([[1]], "Q")),
        GroupMap(C, zero_out, ExactMatrix.zeros(0, 1, "Q")),
    ]
    assert check_exact(chain).passed


def test_check_exact_reports_failing_node():
    zero_in, zero_out = SubQuotient.zero(), SubQuotient.zero()
    A, B, C = _z(), _z(), _z(3)
    chain = [
        GroupMap(zero_in, A, ExactMatrix.zeros(1, 0, "Q")),
        GroupMap(A, B, ExactMatrix([[2]], "Q")),
        GroupMap(B, C, ExactMatrix([[1]], "Q")),
        GroupMap(C, zero_out, ExactMatrix.zeros(0, 1, "Q")),
    ]
    rep = check_exact(chain)
    assert not rep.passed
    # Z -2-> Z -> Z/3: the composite Z -> Z/3 is nonzero, so the middle node fails
    bad = rep.failures()
    assert [j.node for j in bad] == [2]
    assert bad[0].defect is None


def test_check_exact_composition_mismatch():
    A, B = _z(), _z(2)
    with pytest.raises(CompositionMismatch):
        check_exact([GroupMap(A, B, ExactMatrix([[1]], "Q")), GroupMap(A, A, ExactMatrix([[1]], "Q"))])


def test_check_exact_cyclic_numbering():
    A = _z()
    f = GroupMap(A, A, ExactMatrix([[0]], "Q"))
    rep = check_exact([f, f], cyclic=True)
    assert [j.node for j in rep.junctions] == [1, 0]


# --------------------------------------------------------------------------
# extensions


def test_extension_divisible_sub_splits():
    assert resolve_extension(DiffCohGroup(3, 1), FgAbGroup(0, (5,))) == DiffCohGroup(3, 1, 0, (5,))


def test_extension_zero_sub():
    G = FgAbGroup(2, (3,))
    assert resolve_extension(DiffCohGroup(), G) == G.as_diff()


def test_extension_z2_by_z2_is_ambiguous():
    r = resolve_extension(DiffCohGroup(finite_factors=(2,)), FgAbGroup(0, (2,)))
    assert isinstance(r, Ambiguous)
    assert set(r.candidates) == {DiffCohGroup(finite_factors=(4,)), DiffCohGroup(finite_factors=(2, 2))}


def test_extension_free_quotient_splits():
    assert resolve_extension(DiffCohGroup(finite_factors=(2,)), FgAbGroup(1)) == DiffCohGroup(0, 0, 1, (2,))


def test_extension_coprime_orders_forced():
    assert resolve_extension(DiffCohGroup(finite_factors=(2,)), FgAbGroup(0, (3,))) == DiffCohGroup(finite_factors=(6,))


def test_extension_vector_quotient_over_finite_sub():
    assert resolve_extension(DiffCohGroup(finite_factors=(3,)), DiffCohGroup(4)) == DiffCohGroup(4, 0, 0, (3,))


def test_extension_torus_quotient_over_finite_sub_is_ambiguous():
    assert isinstance(resolve_extension(DiffCohGroup(finite_factors=(3,)), DiffCohGroup(0, 1)), Ambiguous)


def test_extension_candidates_z4_by_z2():
    assert extension_candidates(FgAbGroup(0, (2,)), FgAbGroup(0, (4,))) == (
        FgAbGroup(0, (2, 4)),
        FgAbGroup(0, (8,)),
    )


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.lists(st.integers(2, 12), max_size=3))
def test_divisible_sub_keeps_quotient_data(v, t, r, orders):
    quot = FgAbGroup.from_orders(r, orders)
    E = resolve_extension(DiffCohGroup(v, t), quot)
    assert E.finite_factors == quot.invariant_factors
    assert E.lattice_rank == quot.free_rank
    assert (E.vector_dim, E.torus_rank) == (v, t)
