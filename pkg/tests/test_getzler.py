from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st
from sympy.functions.combinatorial.numbers import stirling

from cp1hqe.fock import FockElement, qvar
from cp1hqe.getzler import (TriangularChange, a_coefficients, a_partial_fraction_oracle, bracket_number,
                            getzler_inverse, negative_term_identity, positive_term_identity,
                            toda_tau_sequence, transform_identity, two_toda_hqe_residual, vacuum_taus)
from cp1hqe.mpoly import MPoly
from cp1hqe.params import random_fields, symbolic_field


@pytest.fixture(scope="module")
def P():
    return random_fields(3, 1)[0]


def test_bracket_small_table():
    assert [[bracket_number(k, i) for i in range(1, k + 1)] for k in range(1, 5)] == \
        [[1], [1, 1], [2, 3, 1], [6, 11, 6, 1]]


@given(st.integers(1, 9), st.integers(1, 9))
def test_bracket_matches_stirling(k, i):
    if i > k:
        with pytest.raises(ValueError):
            bracket_number(k, i)
    else:
        assert bracket_number(k, i) == stirling(k, i, kind=1)


@given(st.integers(1, 9))
def test_bracket_row_sum_is_factorial(k):
    assert sum(bracket_number(k, i) for i in range(1, k + 1)) == factorial(k)


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_rows_match_partial_fraction_oracle(P, sector):
    for k in range(7):
        assert a_coefficients(P, k, 10, sector) == a_partial_fraction_oracle(P, k, 10, sector)


def test_rows_are_triangular(P):
    for k in range(5):
        row = a_coefficients(P, k, 8)
        assert all(not c for c in row[:k]) and row[k]


def test_first_row_symbolic():
    P = symbolic_field()
    # leading coefficient of 1/(nu (nu - w)) at w = infinity
    assert a_coefficients(P, 0, 2)[0] == P.one / P.nu


def test_inverse_block(P):
    ch = TriangularChange.build(P, 6, 10)
    assert ch.is_triangular() and ch.block_identity()
    inv = getzler_inverse(P, 2)
    assert set(inv) == {0, 1, 2}


@pytest.mark.parametrize("sector", ["0", "inf"])
def test_operator_identities(P, sector):
    for k in range(7):
        assert negative_term_identity(P, k, sector)
        assert positive_term_identity(P, k, 10, sector)


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("sector", ["0", "inf"])
def test_vertex_transform(P, sign, sector):
    assert transform_identity(P, sign, sector, 6)


def test_tau_sequence_shift_and_weight():
    T = FockElement(MPoly.var(qvar(0, "0")) * MPoly.var(qvar(0, "inf")))
    taus = toda_tau_sequence(T, range(-1, 3))
    assert taus[2].q_weight == 2 and taus[-1].q_weight == Fraction(1, 2)
    assert taus[0].T.equals(T)
    # tau_1 = exp(eps d) T: (q0 + eps)(qinf + eps)
    L1 = taus[1].T.L
    assert L1.coeff_of("eps", 2).const_term() == 1


def test_vacuum_residual_diagonal(P):
    taus = vacuum_taus(range(-2, 4))
    for n in (0, 1):
        assert two_toda_hqe_residual(taus, n, n, P, y_degree=2, levels=3).is_zero()


def test_vacuum_residual_off_diagonal_oracle(P):
    # (n, m) = (0, 1): lam^{-1} times the lam^1 multiplication 2 u_0 / eps; the
    # second term needs lam^{1} from shifts of constant taus, which is absent
    taus = vacuum_taus(range(-2, 4))
    expected = MPoly.var("y:y_0_0") * MPoly.var("eps", -1) * 2
    for y_degree, levels in ((1, 1), (2, 3)):
        R = two_toda_hqe_residual(taus, 0, 1, P, y_degree=y_degree, levels=levels)
        assert R.total().equals(expected)


def test_rescaled_times_same_zero_test(P):
    taus = vacuum_taus(range(-2, 4))
    assert two_toda_hqe_residual(taus, 1, 1, P, 2, 3, rescale=True).is_zero()


def test_residual_constant_moves_into_prefactor(P):
    base = FockElement(MPoly.var(qvar(0, "0")) * MPoly.var(qvar(1, "inf")))
    shifted = FockElement(base.L + MPoly.const(3))
    a = two_toda_hqe_residual(toda_tau_sequence(base, range(-1, 3)), 0, 0, P, 1, 2)
    b = two_toda_hqe_residual(toda_tau_sequence(shifted, range(-1, 3)), 0, 0, P, 1, 2)
    assert len(a.groups) == len(b.groups)
    for (Ga, Ra), (Gb, Rb) in zip(a.groups, b.groups):
        assert (Gb - Ga).equals(MPoly.const(6))
        assert (Ra - Rb).equals(MPoly())
