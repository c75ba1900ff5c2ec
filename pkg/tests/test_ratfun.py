from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from cp1hqe.params import symbolic_field
from cp1hqe.ratfun import (NonRationalIntegral, Poly, QuadExt, RationalFunction,
                           hermite_reduce, integrate, residue_at_root)

fracs = st.fractions(min_value=-9, max_value=9, max_denominator=7)
X = RationalFunction.x()


def test_partial_fraction_oracle_for_critical_reciprocal():
    P = symbolic_field()
    nu, s = P.nu, P.s
    f = 1 / (X * X - X * nu - s)
    r0 = residue_at_root(f, nu, s)
    r1 = residue_at_root(f, nu, s, conjugate=True)
    # 1/(x-r)(x-r') has residues +-1/(r-r')
    lhs = r0 * (QuadExt(-nu, 2, nu, s))
    assert not (lhs - 1)
    assert not (r0 + r1)
    assert f.residue_at_zero() == 0
    assert f.residue_at_infinity() == 0


def test_residue_theorem_sample():
    P = symbolic_field()
    nu, s = P.nu, P.s
    f = (X ** 3 + 2) / (X ** 2 * (X * X - X * nu - s))
    total = (residue_at_root(f, nu, s) + residue_at_root(f, nu, s, conjugate=True)
             + f.residue_at_zero() + f.residue_at_infinity())
    assert not total


def test_integrate_detects_log():
    with pytest.raises(NonRationalIntegral) as e:
        integrate(1 / X + X)
    assert e.value.log_part.equals(1 / X)
    assert integrate(1 - 1 / (X * X)).equals(X + 1 / X)


def test_reciprocal_substitution():
    f = (X + 1) / (X - 3)
    g = f.substitute_reciprocal(F(2))
    assert g.equals((2 / X + 1) / (2 / X - 3))


polys = st.lists(fracs, min_size=1, max_size=4)


@given(polys, st.lists(fracs, min_size=1, max_size=3), st.integers(1, 3))
def test_hermite_reconstructs(num, droot, mult):
    den = Poly((1,))
    for r in droot:
        den = den * Poly((-r, 1)) ** mult
    f = RationalFunction(Poly(num), den)
    g, q, r, dstar = hermite_reduce(f)
    h = RationalFunction(q) + RationalFunction(r, dstar)
    assert (g.derivative() + h).equals(f)
    assert r.deg < dstar.deg or not r


@given(polys, polys.filter(lambda c: any(c)))
def test_derivative_then_integrate_differs_by_constant(num, den):
    f = RationalFunction(Poly(num), Poly(den) * Poly((0, 0, 1)))
    diff = integrate(f.derivative()) - f
    assert diff.den.deg == 0 and diff.num.deg <= 0


@given(polys, st.integers(0, 3))
def test_expansion_multiplies_back(num, k):
    den = Poly((F(3), -1, 1)) * Poly((0, 1)) ** k
    f = RationalFunction(Poly(num), den)
    for inf in (False, True):
        e = f.expand(4, at_infinity=inf)
        d = den.to_series(40, at_infinity=inf)
        n = (e * d)
        ref = Poly(num).to_series(n.order, at_infinity=inf)
        assert n.agrees_with(ref)
