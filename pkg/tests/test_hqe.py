import pytest

from cp1hqe.fock import FockElement, qvar
from cp1hqe.hqe import (ResidualCuts, hqe_descendant_residual, kernel_equivalence, plane_wave_descendant,
                        plane_wave_toda)
from cp1hqe.getzler import TriangularChange
from cp1hqe.mpoly import MPoly
from cp1hqe.params import random_fields


@pytest.fixture(scope="module")
def P():
    return random_fields(7, 1)[0]


def test_depth_accounts_for_shift():
    c = ResidualCuts(2, 3)
    assert c.depth(0, 0) == 9 and c.depth(2, 0) == 11


@pytest.mark.parametrize("nm", [(0, 0), (1, 0), (0, 1)])
def test_kernel_equivalence_small_cuts(P, nm):
    r = kernel_equivalence(P, *nm, ResidualCuts(2, 2, 1))
    assert r.equal, r.witness
    assert r.descendant_terms == r.toda_terms > 0


def test_equivalence_detects_a_wrong_relative_power(P, monkeypatch):
    import cp1hqe.hqe as hqe
    monkeypatch.setattr(hqe, "_qpow", lambda P, e: P.Q ** (e + 1))
    assert not kernel_equivalence(P, 1, 0, ResidualCuts(1, 1, 1)).equal


def test_plane_waves_agree_on_change(P):
    ch = TriangularChange.build(P, 2, 4)
    D = plane_wave_descendant(ch, 2, 4)
    T = plane_wave_toda(2)
    assert len(D.L.terms) >= len(T.L.terms)
    with pytest.raises(ValueError):
        from cp1hqe.hqe import eta
        eta(0, "0", "xi")


def test_residual_constant_moves_into_prefactor(P):
    L = MPoly.var(qvar(0, "0")) * MPoly.var(qvar(1, "inf")) + MPoly.var(qvar(1, "0"))
    cuts = ResidualCuts(1, 2)
    a = hqe_descendant_residual(FockElement(L), 0, 0, P, cuts)
    b = hqe_descendant_residual(FockElement(L + MPoly.const(5)), 0, 0, P, cuts)
    for (Ga, Ra), (Gb, Rb) in zip(a.groups, b.groups):
        assert (Gb - Ga).equals(MPoly.const(10))
        assert (Ra - Rb).equals(MPoly())


def test_identity_factor_slice(P):
    # y-degree 0: no derivative acts, the residual is a pure prefactor combination
    a = hqe_descendant_residual(FockElement(MPoly()), 0, 0, P, ResidualCuts(0, 1))
    assert a.is_zero() or all(not R.variables() - {"eps"} for _, R in a.groups)
