import random
from fractions import Fraction

import pytest

from cp1hqe.ancestor import (AncestorCuts, NonTameInput, PoleData, hqe_ancestor_reports,
                             hqe_ancestor_residual, prefactor_parts, random_tame, residues, stable_under,
                             x_power)
from cp1hqe.fock import FockElement, tvar
from cp1hqe.mpoly import MPoly
from cp1hqe.params import random_fields
from cp1hqe.ratfun import Poly, RationalFunction

SMALL = AncestorCuts(1, 1, 1, 1, 1, 1)


@pytest.fixture(scope="module")
def P():
    return random_fields(13, 1)[0]


def test_trivial_slice_m1(P):
    r = hqe_ancestor_residual(FockElement(), 1, P, AncestorCuts(0, 0, 0, 0, 0, 0))
    [(key, (c, e, const))] = r.forms.items()
    assert key == ((), 0, 0) and c == 1 and e == -2 and const == 1
    res = r.residues[key]
    # dx / x^2 has no residue anywhere
    assert not res.at_zero and not res.at_infinity and not res.four_point_sum()


def test_prefactor_m_dependence(P):
    assert prefactor_parts(P, 1, 0, 1)[0] == 0
    c, e = prefactor_parts(P, 2, 1, 1)
    assert e == -3 and c == 3 * P.s / P.nu * (1 / P.nu)


def test_pole_data_matches_direct_residues(P):
    x = RationalFunction.x()
    D = RationalFunction(Poly((-P.s, -P.nu, 1)))
    f = (x * x * x + 2) / (D * D * x * RationalFunction(Poly((-1, 1))))
    pd = PoleData.of(f, P, -4, 2)
    for e in range(-4, 3):
        a = pd.residues(e, Fraction(3))
        b = residues(f * x_power(e) * 3, P)
        assert not (a.at_zero - b.at_zero) and not (a.at_infinity - b.at_infinity)
        assert not (a.at_root - b.at_root) and not (a.at_conjugate_root - b.at_conjugate_root)
        # the extra pole at x = 1 carries minus the four-point sum
        assert not (a.four_point_sum() + (f * x_power(e) * 3 * RationalFunction(Poly((-1, 1))))(Fraction(1)))


def test_four_point_sum_on_random_data(P):
    T = random_tame(P, random.Random(3))
    reps = hqe_ancestor_reports(T, (0, 1, 2), P, SMALL)
    for m, r in reps.items():
        assert r.forms and r.residue_theorem_holds()
        single = hqe_ancestor_residual(T, m, P, SMALL).residues
        assert set(single) == set(r.residues)
        for key, a in single.items():
            b = r.residues[key]
            assert not (a.at_zero - b.at_zero) and not (a.at_root - b.at_root)


def test_hqe_fails_for_random_data(P):
    T = random_tame(P, random.Random(4))
    assert not hqe_ancestor_residual(T, 0, P, SMALL).hqe_holds()


@pytest.mark.parametrize("name", ["y_degree", "x_degree", "u_levels", "q_order", "h_order"])
def test_stability(P, name):
    T = random_tame(P, random.Random(hash(name) % 1000))
    a = hqe_ancestor_residual(T, 2, P, SMALL)
    b = hqe_ancestor_residual(T, 2, P, SMALL.deepen(name))
    assert stable_under(a, b)


def test_stability_detects_change(P):
    T = random_tame(P, random.Random(8))
    a = hqe_ancestor_residual(T, 0, P, SMALL)
    b = hqe_ancestor_residual(T, 0, P, SMALL)
    key = next(iter(b.forms))
    c, e, const = b.forms[key]
    b.forms[key] = (c, e, const * 2)
    assert not stable_under(a, b)


def test_non_tame_rejected(P):
    T = FockElement(MPoly.var(tvar(3, "0")) * MPoly.var("eps", -2))
    with pytest.raises(NonTameInput):
        hqe_ancestor_residual(T, 0, P, SMALL)


def test_random_tame_is_tame(P):
    from cp1hqe.fock import is_tame
    for seed in range(10):
        assert is_tame(random_tame(P, random.Random(seed)))
