from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cp1hqe.mpoly import MPoly, exp_filtered, from_terms

VARS = ["a", "b", "c"]
mono = st.dictionaries(st.sampled_from(VARS), st.integers(0, 3), max_size=3)
coef = st.fractions(min_value=-4, max_value=4, max_denominator=3)
poly = st.lists(st.tuples(mono, coef), max_size=4).map(from_terms)


@given(poly, poly, poly)
def test_ring_laws(p, q, r):
    assert (p * (q + r)).equals(p * q + p * r)
    assert ((p * q) * r).equals(p * (q * r))
    assert (p * q).equals(q * p)


@given(poly, poly)
def test_leibniz(p, q):
    assert (p * q).diff("a").equals(p.diff("a") * q + p * q.diff("a"))


@given(poly, poly)
def test_substitution_is_a_homomorphism(p, q):
    m = {"a": MPoly.var("b") + 1, "c": MPoly.var("a") * 2}
    assert (p * q).subs(m).equals(p.subs(m) * q.subs(m))


@given(poly)
def test_by_power_reassembles(p):
    out = MPoly()
    for e, c in p.by_power("b").items():
        out = out + c * MPoly.var("b", e)
    assert out.equals(p)


def test_exp_filtered_inverse():
    x = MPoly.var("a") + MPoly.var("b") * Fraction(1, 2)
    w = lambda m: sum(e for _, e in m)
    e1, e2 = exp_filtered(x, w, 4), exp_filtered(-x, w, 4)
    assert e1.mul_trunc(e2, lambda m: w(m) <= 4).equals(MPoly.const(1))
    with pytest.raises(ValueError):
        exp_filtered(x + 1, w, 3)


def test_laurent_grading_variable():
    e = MPoly.var("eps", -2) * MPoly.var("eps", 2)
    assert e.equals(MPoly.const(1))
    with pytest.raises(ValueError):
        MPoly.var("a", -1).subs({"a": MPoly.var("b")})


def test_pruned_substitution():
    p = MPoly.var("a") ** 3
    keep = lambda m: sum(e for _, e in m) <= 2
    assert not p.subs({"a": MPoly.var("b") + MPoly.var("c")}, keep)
