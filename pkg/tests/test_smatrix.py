import pytest
from hypothesis import given, settings, strategies as st

from cp1hqe.params import numeric_field, random_fields, symbolic_field
from cp1hqe.series import SeriesError, TruncSeries
from cp1hqe.smatrix import (antiderivative_difference, cancellation_value, change_lambda, change_x_form,
                            change_xbar1_form, change_xbar_form, commutation_closed_form,
                            commutation_exponent, constant_closed_form, descendant_ancestor_equivalence,
                            direct_family, eigenrelation_mismatches, family_mismatches, integral_holds,
                            integral_one, integral_two, inverse_mirror, j_operator, ladder_family,
                            ladder_mismatches, lambda_residue, mirror_coordinate, mirror_residual,
                            phase_derivative_defect, phi0_column, reciprocal_change, s1_pairing, s_matrix,
                            s_matrix_by_dt, series_family, transformation_law_mismatches, unitarity_defect,
                            w_closed_form, w_matrices, w_series, w_telescoping_defect)
import cp1hqe.smatrix as sm


@pytest.fixture(scope="module")
def P():
    return random_fields(11, 1)[0]


@pytest.fixture(scope="module")
def Y():
    return symbolic_field()


def test_j_at_zero_degree(P):
    J = j_operator(P, 0, 1)
    assert J["0"].coeffs == {0: 1} and J["inf"].coeffs == {0: 1}


def test_j_window_needs_degree(P):
    with pytest.raises(SeriesError):
        j_operator(P, 1, 6)


def test_s_matrix_trivial_point():
    P0 = numeric_field(dict(nu0=2, nuinf=-1, t=0, s=0, Q=1))
    S = s_matrix(P0, 2)
    assert S[0] == ((1, 0), (0, 1))
    assert all(S[m] == ((0, 0), (0, 0)) for m in range(1, S.depth + 1))


def test_s_matrix_symbolic_derivative(Y):
    A, B = s_matrix(Y, 2), s_matrix_by_dt(Y, 2)
    assert all(A.op[m] == B.op[m] for m in range(A.op.lo, 1))


def test_phi0_column_closed_form(P):
    S = s_matrix(P, 3)
    assert S.column("0").agrees_with(phi0_column(P, 3))


@pytest.mark.parametrize("seed", range(3))
def test_unitarity(seed):
    P = random_fields(seed, 1)[0]
    assert unitarity_defect(s_matrix(P, 3)) == {}


def test_unitarity_detects_perturbation(P):
    S = s_matrix(P, 2)
    (a, b), (c, d) = S[1]
    bad = dict(S.op.mats)
    bad[-1] = ((a + 1, b), (c, d))
    broken = sm.SMatrix(P, 2, sm.LoopOperator(bad, S.op.lo))
    assert unitarity_defect(broken)


def test_s1_symbolic(Y):
    assert s1_pairing(Y, "0") == Y.t * Y.nu0 / Y.nu + Y.s / Y.nu ** 2
    assert s1_pairing(Y, "inf") == -Y.t * Y.nuinf / Y.nu + Y.s / Y.nu ** 2
    assert s1_pairing(Y, "0") == constant_closed_form(Y, "0")


def test_cancellation_symbolic(Y):
    assert not cancellation_value(Y)


def test_w_anchor_and_telescoping(P):
    S = s_matrix(P, 3)
    W = w_matrices(S, 5)
    assert W[(0, 0)] == S[1]
    assert w_telescoping_defect(S, W, 5) == []


def test_w_needs_depth(P):
    with pytest.raises(SeriesError):
        w_matrices(s_matrix(P, 1), 3)


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_phase_closed_form(P, sector):
    w = w_series(s_matrix(P, 3), sector, 4)
    assert w.order == 6
    assert w.agrees_with(w_closed_form(P, sector, w.order))


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_phase_derivative_identity(P, sector):
    assert not phase_derivative_defect(s_matrix(P, 3), sector, 4)


def test_phase_closed_form_rejects_wrong_constant(P):
    w = w_series(s_matrix(P, 3), "0", 4)
    assert not w.agrees_with(w_closed_form(P, "0", w.order) + 1)


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_antiderivative_identities(P, sector):
    assert integral_holds(integral_one(P, sector))
    assert integral_holds(integral_two(P, sector))


def test_antiderivative_identity_detects_error(P):
    prim, integrand = integral_two(P)
    assert not integral_holds((prim, integrand * 2))


def test_mirror_trivial():
    P0 = numeric_field(dict(nu0=3, nuinf=1, t=0, s=0, Q=1))
    x = mirror_coordinate(P0, "0", 6)
    assert x.coeffs == {1: 1}


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_mirror_back_substitution(P, sector):
    x = mirror_coordinate(P, sector, 8)
    assert not mirror_residual(x, P, sector)
    lam = inverse_mirror(x)
    ident = TruncSeries({1: 1}, lam.order, "x", True)
    assert (x.compose(lam) - ident).truncate(lam.order - 1).coeffs == {}


def test_antiderivative_along_change(P):
    x = mirror_coordinate(P, "0", 8)
    psi = antiderivative_difference(x, P, "0")
    assert psi.coeffs == {0: P.t * P.nu0, -1: P.s}


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_eigenrelation(sector):
    P0 = numeric_field(dict(nu0=5, nuinf=2, t=0, s=0, Q=1))
    assert eigenrelation_mismatches(P0, sector) == []


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_three_pipelines(P, sector):
    S = s_matrix(P, 2)
    A = direct_family(S, sector, 5)
    assert family_mismatches(A, series_family(P, sector, 5, 10)) == []
    assert ladder_mismatches(A, ladder_family(P, sector, 5, -9, 4)) == []


def test_series_pipeline_detects_mutation(P, monkeypatch):
    orig = sm._SeriesOperator.forward

    def bad(self, F, order):
        return {e: (a * 2, b) if e == -3 else (a, b) for e, (a, b) in orig(self, F, order).items()}

    monkeypatch.setattr(sm._SeriesOperator, "forward", bad)
    A = direct_family(s_matrix(P, 2), "0", 5)
    assert family_mismatches(A, series_family(P, "0", 5, 10))


def test_transformation_law(P):
    assert transformation_law_mismatches(P, "0", 5, 5) == []


@settings(max_examples=10, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_commutation_exponents_symbolic(m, n):
    Y = symbolic_field()
    for sector in ("0", "inf"):
        assert commutation_exponent(Y, m, n, sector) == commutation_closed_form(Y, m, n, sector)


@pytest.mark.parametrize("m", [-2, 0, 1, 3])
def test_change_of_variables_symbolic(Y, m):
    C0, Ci = s1_pairing(Y, "0"), s1_pairing(Y, "inf")
    x_form = change_lambda(lambda_residue(Y, "0", m, C0), Y, "0")
    xb_form = change_lambda(lambda_residue(Y, "inf", m, Ci), Y, "inf")
    assert x_form.differs_from(change_x_form(Y, m, C0)) is None
    assert xb_form.differs_from(change_xbar_form(Y, m, Ci)) is None
    flipped = reciprocal_change(xb_form, Y)
    assert flipped.differs_from(change_xbar1_form(Y, m, Ci)) is None
    assert not (x_form.exponent - flipped.exponent)


def test_wrong_constant_breaks_collapse(Y):
    flipped = reciprocal_change(change_lambda(lambda_residue(Y, "inf", 1, Y.one), Y, "inf"), Y)
    x_form = change_lambda(lambda_residue(Y, "0", 1, s1_pairing(Y, "0")), Y, "0")
    assert x_form.exponent - flipped.exponent


def test_equivalence_steps(P):
    r = descendant_ancestor_equivalence(P, ms=(0, 1), ns=(0, 1))
    assert r.steps == {"i": True, "ii": True, "iii": True, "iv": True}
