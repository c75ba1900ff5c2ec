import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cp1hqe.fock import (FockElement, FockVector, apply_exp_linear, apply_linear, apply_vertex,
                         dilaton_shift, is_tame, qvar, quantize_linear, tvar)
from cp1hqe.loop import (CohClass, LoopVector, Undecidable, darboux, dual, from_darboux,
                         from_standard, pairing, phi, polarize, symplectic_form, to_standard)
from cp1hqe.mpoly import MPoly
from cp1hqe.params import random_fields

P = random_fields(21, 1)[0]

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)
coh = st.builds(CohClass, small, small)
loop = st.dictionaries(st.integers(-3, 2), coh, max_size=4).map(LoopVector)


def test_pairing_against_dual_basis():
    for i in ("0", "inf"):
        for j in ("0", "inf"):
            assert pairing(phi(i), dual(j, P), P) == (1 if i == j else 0)


@given(small, small)
def test_standard_basis_round_trip(a, b):
    assert to_standard(from_standard(a, b, P), P) == (a, b)


@given(loop)
def test_darboux_round_trip(f):
    g = from_darboux(darboux(f, P), P)
    assert not (g - f).coeffs


@given(loop, loop)
def test_symplectic_form_antisymmetric(f, g):
    assert symplectic_form(f, g, P) == -symplectic_form(g, f, P)


def test_symplectic_form_undecidable_window():
    f = LoopVector({0: phi("0")})
    g = LoopVector({-1: phi("0")}, lo=-1)
    assert symplectic_form(f, g, P) == 1 / P.nu
    with pytest.raises(Undecidable):
        symplectic_form(f, LoopVector({-1: phi("0")}, lo=0), P)


def test_quantize_examples():
    op = quantize_linear(LoopVector({0: phi("0")}), P)
    assert op.alpha == {(0, "0"): 1} and not op.gamma
    n = 2
    f = LoopVector({-n - 1: dual("0", P).scale(-(-1) ** (n + 1))})
    assert quantize_linear(f, P).mult_exponent().equals(MPoly.var(qvar(n, "0")) * MPoly.var("eps", -1))
    assert quantize_linear(LoopVector(), P).is_zero()


L0 = MPoly.var(qvar(0, "0")) * MPoly.var(qvar(1, "inf")) + MPoly.var(qvar(2, "0")) ** 2 \
    + MPoly.var(qvar(0, "inf")) * MPoly.var("eps", -2)


@given(loop, loop)
def test_heisenberg(f, g):
    V = FockVector.of(L0)
    fh, gh = quantize_linear(f, P), quantize_linear(g, P)
    a = apply_linear(fh, apply_linear(gh, V)).P
    b = apply_linear(gh, apply_linear(fh, V)).P
    assert (a - b).equals(MPoly.const(symplectic_form(f, g, P)))


@given(loop, loop)
def test_commutation_factor(f, g):
    V = FockVector.of(L0)
    a = apply_exp_linear(f, apply_exp_linear(g, V, P), P)
    b = apply_exp_linear(g, apply_exp_linear(f, V, P), P)
    assert (a.L - b.L).equals(MPoly.const(symplectic_form(f, g, P)))
    assert (a.P - b.P).equals(MPoly())


@given(loop)
def test_vertex_inverse_pair(f):
    V = FockVector.of(L0)
    back = apply_exp_linear(f.scale(-1), apply_exp_linear(f, V, P), P)
    assert back.L.equals(L0) and back.P.equals(MPoly.const(1))
    # normal-ordered pairs leave the recorded scalar Omega(f_-, f_+)
    T = FockElement(L0)
    minus, plus = polarize(f)[1], polarize(f)[0]
    out = apply_vertex(f.scale(-1), apply_vertex(f, T, P), P)
    assert (out.L - L0).equals(MPoly.const(symplectic_form(minus, plus, P)))


def test_vertex_zero_is_identity():
    T = FockElement(L0)
    assert apply_vertex(LoopVector(), T, P).equals(T)


def test_tameness_examples():
    t = lambda k, i="0": MPoly.var(tvar(k, i))
    assert is_tame(FockElement.from_genus({0: t(0) ** 3, 1: t(1)}))
    assert not is_tame(FockElement.from_genus({0: t(1) ** 3}))
    assert is_tame(FockElement.from_genus({1: t(1) * t(0, "inf")}))
    assert not is_tame(FockElement.from_genus({1: t(2)}))


def test_dilaton_round_trip():
    F = MPoly.var(tvar(1, "0")) ** 2 * MPoly.var(tvar(0, "inf"))
    G = dilaton_shift(F)
    assert G.const_term() == 0 and G.coeff_of(qvar(1, "0"), 0).equals(MPoly.var(qvar(0, "inf")))
    assert dilaton_shift(G, inverse=True).equals(F)


def test_json_round_trip():
    T = FockElement.from_genus({0: MPoly.var(qvar(0, "0")) * Fraction(3, 7), 1: MPoly.var(qvar(1, "inf"))})
    assert FockElement.from_json(T.to_json(), P).equals(T)
    assert T.to_json() == FockElement.from_json(T.to_json(), P).to_json()
    with pytest.raises(ValueError):
        FockElement.from_json('{"schema": "other"}', P)


def test_genus_parts():
    T = FockElement.from_genus({0: MPoly.var(qvar(0, "0")), 2: MPoly.var(qvar(1, "0"))})
    assert set(T.genus_parts()) == {0, 2}


from cp1hqe.fock import (DELTA, apply_quadratic, commutator_check, conjugation_check,
                         quantize_quadratic, toy_generator)
from cp1hqe.loop import LoopOperator

L1 = MPoly.var(qvar(0, "0")) ** 2 * MPoly.var("eps", -2) * Fraction(1, 3) \
    + MPoly.var(qvar(1, "inf")) * MPoly.var(qvar(0, "0"))


def test_quadratic_identity():
    H = quantize_quadratic(LoopOperator({}), P, 3)
    V = apply_quadratic(H, FockVector.of(L1), 2)
    assert V.P.equals(MPoly.const(1)) and V.L.equals(L1)


def test_quadratic_first_order_on_vacuum():
    H = quantize_quadratic(toy_generator(P), P, 3)
    V = apply_quadratic(H, FockVector.of(MPoly()), 1)
    # only the qq-rule survives on 1
    expected = MPoly.const(1)
    for (a, b), c in H.qq.items():
        expected = expected + MPoly.var(a) * MPoly.var(b) * c * MPoly.var("eps", -2)
    assert V.P.equals(expected) and not H.pp


def test_quadratic_rejects_non_triangular():
    M = ((1, 0), (0, 1))
    with pytest.raises(ValueError):
        quantize_quadratic(LoopOperator({-1: M, 1: M}), P, 2)


@given(loop)
def test_conjugation_matches_quadratic_quantization(f):
    assert all(conjugation_check(f, L1, P, 2).values())


@given(loop)
def test_toy_commutator(f):
    assert commutator_check(f, FockVector(MPoly.var(qvar(0, "inf")) + 1, L1), P)
