from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from cp1hqe.series import SeriesError, TruncSeries
from cp1hqe.params import symbolic_field

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def ser0(coeffs, order=6):
    return TruncSeries(dict(enumerate(coeffs)), order, "z")


def test_product_polynomial_identity():
    a = TruncSeries({0: 1, 1: 1}, 3)
    b = TruncSeries({0: 1, 1: -1}, 3)
    p = a * b
    assert p.coeffs == {0: 1, 2: -1}
    assert p.window == (0, 2)


def test_derivative_of_cube():
    d = TruncSeries({3: 1}, 6).derivative()
    assert d.coeffs == {2: 3} and d.order == 5


def test_geometric_at_infinity_symbolic():
    P = symbolic_field()
    nu = P.nu
    f = TruncSeries({0: nu, 1: -1}, 5, at_infinity=True)  # nu - z
    g = f.inverse().truncate(5)
    assert g.window == (-4, -1)
    for m in range(4):
        assert g[-m - 1] == -nu ** m
    back = (g * f)
    assert back[0] == 1 and all(back[e] == 0 for e in (-1, -2, -3))


def test_division_needs_leading_term():
    with pytest.raises(SeriesError):
        TruncSeries({}, 3).inverse()


def test_exp_examples():
    assert TruncSeries({}, 4).exp().coeffs == {0: 1}
    e = TruncSeries({1: 1}, 4).exp()
    assert e.coeffs == {0: 1, 1: 1, 2: F(1, 2), 3: F(1, 6)}


def test_exp_rejects_constant_term_and_log_rejects_bad_constant():
    with pytest.raises(SeriesError):
        TruncSeries({0: 1, 1: 1}, 4).exp()
    with pytest.raises(SeriesError):
        TruncSeries({0: 2}, 4).log()


def test_log_exp_symbolic():
    P = symbolic_field()
    f = TruncSeries({1: P.nu, 2: 1}, 6)
    assert f.exp().log().agrees_with(f)


def test_revert_identity_and_shift():
    x = TruncSeries({1: 1}, 5, "x", True)
    assert x.revert().agrees_with(x)
    g = (x + 7).revert(var="l")
    assert g.coeffs == {1: 1, 0: -7}


def test_revert_bad_input():
    with pytest.raises(SeriesError):
        TruncSeries({2: 1}, 5, "x", True).revert()


def test_residue_conventions():
    P = symbolic_field()
    assert TruncSeries({3: 1}, 5).residue() == 0
    assert TruncSeries({-1: P.nu}, 3, "l", True).residue() == -P.nu
    with pytest.raises(SeriesError):
        TruncSeries({0: 1}, -1).residue()


def test_residue_of_critical_reciprocal_at_zero():
    # 1/(x^2 - nu x - s) is regular at 0
    P = symbolic_field()
    d = TruncSeries({0: -P.s, 1: -P.nu, 2: 1}, 4, "x")
    assert d.inverse().residue() == 0


def test_integrate_with_log():
    P = symbolic_field()
    assert TruncSeries({2: 1}, 5, "x").integrate().coeffs == {3: F(1, 3)}
    li = TruncSeries({-1: P.nu}, 3, "x").integrate()
    assert li.log_part == ((P.nu, "log(x)"),)
    phi = TruncSeries({0: 1, -1: -P.nu, -2: -P.s}, 4, "x", True)
    prim = phi.integrate()
    assert prim.coeffs == {1: 1, -1: P.s}
    assert prim.log_part == ((-P.nu, "log(x)"),)
    assert prim.derivative().agrees_with(phi.truncate(prim.order - 1))


@given(st.lists(fracs, min_size=1, max_size=6), st.lists(fracs, min_size=1, max_size=6))
def test_mul_commutes_and_distributes(a, b):
    A, B = ser0(a), ser0(b)
    assert (A * B).agrees_with(B * A)
    assert (A * (A + B)).agrees_with(A * A + A * B)


@given(st.lists(fracs, min_size=1, max_size=6))
def test_log_exp_round_trip(c):
    f = TruncSeries({i + 1: v for i, v in enumerate(c)}, 7)
    assert f.exp().log().agrees_with(f)


@given(st.lists(fracs, min_size=1, max_size=5), fracs.filter(bool))
def test_inverse_round_trip(c, lead):
    f = ser0([lead] + c)
    assert (f * f.inverse()).agrees_with(TruncSeries({0: 1}, f.order))


@given(st.lists(fracs, min_size=0, max_size=5))
def test_revert_compose_round_trip(tail):
    f = TruncSeries({1: 1, **{-i: c for i, c in enumerate(tail)}}, 6, "x", True)
    g = f.revert(var="l")
    assert f.compose(g).agrees_with(TruncSeries({1: 1}, g.order, "l", True))


@given(st.lists(fracs, min_size=1, max_size=6))
def test_derivative_integral(c):
    f = TruncSeries({i - 2: v for i, v in enumerate(c)}, 5, "x")
    assert f.integrate().derivative().agrees_with(f)


@given(st.lists(fracs, min_size=2, max_size=8))
def test_truncation_stability(c):
    f = TruncSeries({i + 1: v for i, v in enumerate(c)}, len(c) + 1)
    deep = f.exp()
    shallow = f.truncate(3).exp()
    assert deep.truncate(3).agrees_with(shallow)
