"""Univariate polynomials and rational functions over an exact field.

Used for the ancestor modes, which live as rational functions of the
mirror coordinate with poles at 0, infinity and the critical locus
``x^2 - nu x - s = 0``.  Integration is Hermite reduction, so deciding
whether an antiderivative is rational never requires factoring.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

from .series import TruncSeries


class NonRationalIntegral(ArithmeticError):
    """The antiderivative requested carries a logarithmic part."""

    def __init__(self, msg, log_part=None):
        super().__init__(msg)
        self.log_part = log_part


def _trim(cs: Sequence[Any]) -> tuple:
    cs = list(cs)
    while cs and not cs[-1]:
        cs.pop()
    return tuple(cs)


class Poly:
    """Dense polynomial, coefficients listed from the constant term up."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence[Any] = ()):
        self.c = _trim(coeffs)

    @classmethod
    def x(cls):
        return cls((0, 1))

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def lead(self):
        return self.c[-1]

    def __add__(self, o):
        o = _as_poly(o)
        n = max(len(self.c), len(o.c))
        a = self.c + (0,) * (n - len(self.c))
        b = o.c + (0,) * (n - len(o.c))
        return Poly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __sub__(self, o):
        return self + (-_as_poly(o))

    def __rsub__(self, o):
        return _as_poly(o) - self

    def __mul__(self, o):
        if not isinstance(o, Poly):
            return Poly([x * o for x in self.c])
        if not self.c or not o.c:
            return Poly()
        out = [0] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if not a:
                continue
            for j, b in enumerate(o.c):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly((1,))
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c):
        return Poly([x * c for x in self.c])

    def divmod(self, o: "Poly"):
        if not o:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [0] * max(len(r) - len(o.c) + 1, 1)
        inv = _inv(o.lead())
        while len(r) >= len(o.c) and r:
            k = len(r) - len(o.c)
            f = r[-1] * inv
            q[k] = f
            for i, b in enumerate(o.c):
                r[k + i] = r[k + i] - f * b
            r.pop()
            while r and not r[-1]:
                r.pop()
        return Poly(q), Poly(r)

    def __floordiv__(self, o):
        return self.divmod(o)[0]

    def __mod__(self, o):
        return self.divmod(o)[1]

    def monic(self):
        if not self.c:
            return self
        return self.scale(_inv(self.lead()))

    def derivative(self):
        return Poly([i * c for i, c in enumerate(self.c)][1:])

    def integral(self):
        return Poly([0] + [c * Fraction(1, i + 1) for i, c in enumerate(self.c)])

    def __call__(self, v):
        acc = 0
        for c in reversed(self.c):
            acc = acc * v + c
        return acc

    def compose(self, p: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.c):
            acc = acc * p + c
        return acc

    def map(self, fn):
        return Poly([fn(c) for c in self.c])

    def equals(self, o) -> bool:
        return not (self - _as_poly(o)).c

    def to_series(self, order: int, var="x", at_infinity=False) -> TruncSeries:
        return TruncSeries(dict(enumerate(self.c)), order, var, at_infinity)

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"({c})*x^{i}" for i, c in enumerate(self.c) if c)


def _as_poly(o) -> Poly:
    return o if isinstance(o, Poly) else Poly((o,))


def _inv(c):
    if isinstance(c, int):
        return Fraction(1, c)
    return 1 / c


def gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, a % b
    return a.monic()


def ext_gcd(a: Poly, b: Poly):
    """Return (s, t, g) with s a + t b = g = gcd(a, b), g monic."""
    r0, r1 = a, b
    s0, s1 = Poly((1,)), Poly()
    t0, t1 = Poly(), Poly((1,))
    while r1:
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    inv = _inv(r0.lead())
    return s0.scale(inv), t0.scale(inv), r0.scale(inv)


def solve_bezout(a: Poly, b: Poly, c: Poly):
    """(s, t) with s a + t b = c and deg s < deg b."""
    s, t, g = ext_gcd(a, b)
    q, r = c.divmod(g)
    if r:
        raise ArithmeticError("c is not in the ideal (a, b)")
    s, t = s * q, t * q
    if b.deg > 0:
        q2, s = s.divmod(b)
        t = t + q2 * a
    return s, t


class RationalFunction:
    """num/den with den monic and gcd(num, den) = 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce=True):
        num = _as_poly(num)
        den = Poly((1,)) if den is None else _as_poly(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if reduce and num:
            g = gcd(num, den)
            if g.deg > 0:
                num, den = num // g, den // g
        if not num:
            den = Poly((1,))
        lc = den.lead()
        if lc != 1:
            inv = _inv(lc)
            num, den = num.scale(inv), den.scale(inv)
        self.num, self.den = num, den

    @classmethod
    def x(cls):
        return cls(Poly.x())

    def __bool__(self):
        return bool(self.num)

    def __add__(self, o):
        o = _as_rf(o)
        if self.den.equals(o.den):
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduce=False)

    def __sub__(self, o):
        return self + (-_as_rf(o))

    def __rsub__(self, o):
        return _as_rf(o) - self

    def __mul__(self, o):
        if not isinstance(o, (RationalFunction, Poly)):
            return RationalFunction(self.num.scale(o), self.den, reduce=False) if o else RationalFunction(Poly())
        o = _as_rf(o)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, (RationalFunction, Poly)):
            return self * _inv(o)
        o = _as_rf(o)
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o):
        return _as_rf(o) / self

    def __pow__(self, n):
        if n < 0:
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n, reduce=False)

    def derivative(self):
        return RationalFunction(self.num.derivative() * self.den - self.num * self.den.derivative(),
                                self.den * self.den)

    def equals(self, o) -> bool:
        return not (self - _as_rf(o))

    def map(self, fn):
        return RationalFunction(self.num.map(fn), self.den.map(fn))

    def substitute_reciprocal(self, c) -> "RationalFunction":
        """R(c / x)."""
        dn, dd = self.num.deg, self.den.deg
        top = max(dn, dd, 0)

        def flip(p: Poly) -> Poly:
            # x^top * p(c/x)
            out = [0] * (top + 1)
            cp = 1
            for i, a in enumerate(p.c):
                out[top - i] = a * cp
                cp = cp * c
            return Poly(out)

        return RationalFunction(flip(self.num), flip(self.den))

    def expand(self, order: int, var="x", at_infinity=False) -> TruncSeries:
        """Laurent expansion at 0 or infinity certified below ``order``."""
        if not self.num:
            return TruncSeries({}, order, var, at_infinity)
        d = self.den
        # shift so the denominator's leading term becomes a unit
        if at_infinity:
            v = d.deg
            key_den = -v
        else:
            v = next(i for i, c in enumerate(d.c) if c)
            key_den = v
        vn = (-self.num.deg) if at_infinity else next(i for i, c in enumerate(self.num.c) if c)
        # polynomials are exact; give both factors enough certified room
        nser = self.num.to_series(max(order + key_den, vn + 1), var, at_infinity)
        dser = d.to_series(max(order + 2 * key_den - vn, key_den + 1), var, at_infinity)
        return (nser * dser.inverse()).truncate(order)

    def residue_at_zero(self):
        return self.expand(0, at_infinity=False).residue()

    def residue_at_infinity(self):
        return self.expand(2, at_infinity=True).residue()

    def __call__(self, v):
        return self.num(v) / self.den(v)

    def __repr__(self):
        return f"({self.num}) / ({self.den})"


def _as_rf(o) -> RationalFunction:
    if isinstance(o, RationalFunction):
        return o
    return RationalFunction(_as_poly(o))


def squarefree_part(p: Poly) -> Poly:
    return p // gcd(p, p.derivative())


def hermite_reduce(f: RationalFunction):
    """Split int f = g + int h with g rational and h having squarefree denominator.

    Returns ``(g, poly, r, dstar)`` where ``h = poly + r / dstar``,
    ``deg r < deg dstar`` and ``dstar`` is squarefree.
    """
    A, D = f.num, f.den
    g = RationalFunction(Poly())
    dminus = gcd(D, D.derivative())
    dstar = D // dminus
    while dminus.deg > 0:
        d2 = gcd(dminus, dminus.derivative())
        dminus_star = dminus // d2
        a = -(dstar * dminus.derivative() // dminus)
        B, C = solve_bezout(a, dminus_star, A)
        A = C - B.derivative() * (dstar // dminus_star)
        g = g + RationalFunction(B, dminus)
        dminus = d2
    q, r = A.divmod(dstar)
    return g, q, r, dstar


def integrate(f: RationalFunction, constant=0, allow_log=False):
    """Rational antiderivative of ``f``.

    Raises :class:`NonRationalIntegral` when a logarithmic part survives,
    unless ``allow_log`` is set, in which case ``(F, r/dstar)`` is returned.
    """
    g, q, r, dstar = hermite_reduce(f)
    F = g + RationalFunction(q.integral())
    if constant:
        F = F + constant
    if allow_log:
        return F, RationalFunction(r, dstar)
    if r:
        raise NonRationalIntegral("antiderivative has a logarithmic part",
                                  RationalFunction(r, dstar))
    return F


class QuadExt:
    """Element a + b r of K[r]/(r^2 - p r - q): the critical-point extension."""

    __slots__ = ("a", "b", "p", "q")

    def __init__(self, a, b, p, q):
        self.a, self.b, self.p, self.q = a, b, p, q

    def _lift(self, o):
        if isinstance(o, QuadExt):
            return o
        return QuadExt(o, 0, self.p, self.q)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __add__(self, o):
        o = self._lift(o)
        return QuadExt(self.a + o.a, self.b + o.b, self.p, self.q)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.p, self.q)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, QuadExt):
            return QuadExt(self.a * o, self.b * o, self.p, self.q)
        bd = self.b * o.b
        return QuadExt(self.a * o.a + bd * self.q, self.a * o.b + self.b * o.a + bd * self.p,
                       self.p, self.q)

    __rmul__ = __mul__

    def conjugate(self):
        # r -> p - r
        return QuadExt(self.a + self.b * self.p, -self.b, self.p, self.q)

    def norm(self):
        return self.a * self.a + self.a * self.b * self.p - self.b * self.b * self.q

    def __truediv__(self, o):
        if not isinstance(o, QuadExt):
            return self * _inv(o)
        n = o.norm()
        return self * o.conjugate() * _inv(n)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __pow__(self, n):
        out = QuadExt(1, 0, self.p, self.q)
        base = self if n >= 0 else 1 / self
        for _ in range(abs(n)):
            out = out * base
        return out

    def __repr__(self):
        return f"({self.a}) + ({self.b})*r"


def _taylor_at(p: "Poly", r, count: int) -> list:
    """First ``count`` coefficients of p(r + u) by repeated synthetic division."""
    out = []
    cs = list(p.c)
    for _ in range(count):
        if not cs:
            out.append(r * 0)
            continue
        # Horner: cs = (u - r) * quotient + remainder
        acc = r * 0
        quot = []
        for c in reversed(cs):
            acc = acc * r + c
            quot.append(acc)
        out.append(quot.pop())
        cs = list(reversed(quot))
    return out


def residue_at_root(f: RationalFunction, p, q, conjugate=False) -> QuadExt:
    """Residue of f dx at a root r of x^2 - p x - q, as an element a + b r.

    With ``conjugate`` the other root ``p - r`` is used (result still
    expressed in terms of r).
    """
    zero = QuadExt(0, 0, p, q)
    D = Poly((-q, -p, 1))
    rest, v = f.den, 0
    while rest.deg >= 2:
        quo, rem = rest.divmod(D)
        if rem:
            break
        rest, v = quo, v + 1
    if v == 0:
        return zero
    r = QuadExt(0, 1, p, q)
    if conjugate:
        r = r.conjugate()
    # D(r + u) = u (u + r - rbar);  f = num / (D^v rest)
    gap = r - r.conjugate()
    other = TruncSeries({0: gap, 1: QuadExt(1, 0, p, q)}, v, "u") ** v
    nser = TruncSeries({i: c for i, c in enumerate(_taylor_at(f.num, r, v)) if c}, v, "u")
    rser = TruncSeries({i: c for i, c in enumerate(_taylor_at(rest, r, v)) if c}, v, "u")
    c = (nser * (rser * other).inverse()).coeffs.get(v - 1, 0)
    return c if isinstance(c, QuadExt) else zero + c
