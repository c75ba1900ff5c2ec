from fractions import Fraction

import pytest

from cp1hqe.loop import CohClass, phi
from cp1hqe.params import numeric_field, random_fields
from cp1hqe.ratfun import Poly, RationalFunction
from cp1hqe.series import SeriesError
from cp1hqe.vertex import (RationalMode, ancestor_mode_seed, bar_derivative_factor, bar_symmetry_holds,
                           descendant_exponent, exponent_coefficient, ladder_factor, mode_down,
                           mode_expand_at_infinity, mode_ladder, mode_up, perturbed_descent, sigma)

P = random_fields(2, 1)[0]
P_s0 = numeric_field({"nu0": 3, "nuinf": Fraction(1, 2), "t": 1, "s": 0, "Q": 2})


def test_sigma():
    assert sigma("0") == 1 and sigma("inf") == -1
    with pytest.raises(ValueError):
        sigma("1")


def test_exponent_low_orders():
    assert exponent_coefficient(0, P).coeffs == {0: -1}
    assert exponent_coefficient(-1, P).coeffs == {0: -P.nu}
    # -nu (nu + z) (nu + 2 z)
    c = exponent_coefficient(-3, P).coeffs
    assert c == {0: -P.nu ** 3, 1: -3 * P.nu ** 2, 2: -2 * P.nu}
    # -1/(nu - z) = sum nu^m z^{-m-1}
    c = exponent_coefficient(1, P, z_lo=-6).coeffs
    assert all(c[-m - 1] == P.nu ** m for m in range(6))


def test_exponent_support_and_window():
    for fp in ("0", "inf"):
        ex = descendant_exponent(P, -1, fp, 6, -8)
        assert ex.support_ok()
        with pytest.raises(SeriesError):
            ex[7]
    with pytest.raises(SeriesError):
        descendant_exponent(P, 1, "0", 6, -4)


def test_seed_at_s0():
    main = ancestor_mode_seed(P_s0).value.c0
    x = RationalFunction.x()
    assert main.equals(-x / (x - P_s0.nu))


@pytest.fixture(scope="module")
def ladders():
    return (mode_ladder(ancestor_mode_seed(P, "0"), P, -4, 4),
            mode_ladder(ancestor_mode_seed(P, "inf"), P, -4, 4))


def test_ladder_round_trip(ladders):
    L0, _ = ladders
    for n in range(-4, 4):
        assert mode_up(L0[n], P).equals(L0[n + 1])
        assert mode_down(L0[n + 1], P).equals(L0[n])


def test_poles_on_critical_locus(ladders):
    for L in ladders:
        assert all(m.poles_ok(P) for m in L.values())


def test_bar_symmetry(ladders):
    assert all(bar_symmetry_holds(*ladders, P).values())
    assert bar_derivative_factor(P).equals(ladder_factor(P, "0"))


def test_downward_steps_rederive(ladders):
    L0, _ = ladders
    two = mode_up(mode_up(L0[-2], P), P)
    assert two.equals(L0[0])


def test_perturbed_constant_forces_log():
    step = perturbed_descent(ancestor_mode_seed(P), P, CohClass(P.one, P.zero))
    assert step is not None and step <= 2
    assert perturbed_descent(ancestor_mode_seed(P), P, CohClass(P.zero, P.zero)) is None


def test_expand_seed_s0():
    e = mode_expand_at_infinity(ancestor_mode_seed(P_s0), 4).c0
    nu = P_s0.nu
    assert all(e.coeffs.get(-k, 0) == -nu ** k for k in range(5))


def test_expansion_stability(ladders):
    L0, _ = ladders
    a = mode_expand_at_infinity(L0[1], 4)
    b = mode_expand_at_infinity(L0[1], 6)
    for i in ("0", "inf"):
        assert all(b[i].coeffs.get(k, 0) == v for k, v in a[i].coeffs.items())


def test_json(ladders):
    m = ladders[0][-2]
    assert RationalMode.from_json(m.to_json(), P).equals(m)
