"""Truncated one-variable Laurent series with exact coefficients.

A :class:`TruncSeries` is expanded either at ``0`` or at ``infinity``.
Internally each exponent ``e`` is mapped to a *key* ``e`` (at 0) or ``-e``
(at infinity) so that both cases are power series in a small parameter;
``order`` is the first key that is not known.  Thus a series at 0 reads
``sum c_e x^e + O(x^order)`` and a series at infinity reads
``sum c_e x^e + O(x^-order)``.

Coefficients may be anything supporting ``+ - *`` with each other and with
ints, and ``bool`` as a zero test: Fractions, sympy field elements,
polynomials, or other series in a different variable (stacked rings).
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Any, Callable, Iterable


class SeriesError(ValueError):
    """Raised when truncation is too shallow or an operation is undefined."""


def _inv(c):
    if isinstance(c, TruncSeries):
        return c.inverse()
    if isinstance(c, int):
        return Fraction(1, c)
    return 1 / c


class TruncSeries:
    __slots__ = ("var", "coeffs", "order", "at_infinity", "log_part")

    def __init__(self, coeffs: dict[int, Any] | None, order: int, var: str = "z",
                 at_infinity: bool = False, log_part: Iterable | None = None):
        self.var = var
        self.at_infinity = at_infinity
        self.order = order
        d = -1 if at_infinity else 1
        self.coeffs = {e: c for e, c in (coeffs or {}).items() if c and d * e < order}
        self.log_part = tuple(log_part or ())

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, order, var="z", at_infinity=False):
        return cls({}, order, var, at_infinity)

    @classmethod
    def monomial(cls, c, e, order, var="z", at_infinity=False):
        return cls({e: c}, order, var, at_infinity)

    def like(self, coeffs, order=None, log_part=None):
        return TruncSeries(coeffs, self.order if order is None else order,
                           self.var, self.at_infinity, log_part)

    # bookkeeping -------------------------------------------------------
    @property
    def direction(self) -> int:
        return -1 if self.at_infinity else 1

    def key(self, e: int) -> int:
        return -e if self.at_infinity else e

    @property
    def valuation(self) -> int:
        """Smallest key carrying a nonzero coefficient (``order`` if none)."""
        if not self.coeffs:
            return self.order
        return min(self.key(e) for e in self.coeffs)

    @property
    def window(self) -> tuple[int, int]:
        """Range of exponents whose coefficients are certified."""
        if self.at_infinity:
            lo = 1 - self.order
            hi = max(self.coeffs, default=lo)
            return lo, max(hi, lo)
        hi = self.order - 1
        lo = min(self.coeffs, default=hi)
        return min(lo, hi), hi

    def known(self, e: int) -> bool:
        return self.key(e) < self.order

    def __getitem__(self, e: int):
        if not self.known(e):
            raise SeriesError(f"coefficient of {self.var}^{e} lies beyond the truncation")
        return self.coeffs.get(e, 0)

    def __bool__(self):
        return bool(self.coeffs) or bool(self.log_part)

    def _check(self, other: "TruncSeries"):
        if other.var != self.var or other.at_infinity != self.at_infinity:
            raise SeriesError(f"incompatible series: {self.var}@{'inf' if self.at_infinity else 0} "
                              f"vs {other.var}@{'inf' if other.at_infinity else 0}")

    def _same(self, other) -> bool:
        return (isinstance(other, TruncSeries) and other.var == self.var
                and other.at_infinity == self.at_infinity)

    def truncate(self, order: int) -> "TruncSeries":
        return self.like(self.coeffs, min(order, self.order), self.log_part)

    def map(self, fn: Callable[[Any], Any]) -> "TruncSeries":
        return self.like({e: fn(c) for e, c in self.coeffs.items()}, log_part=self.log_part)

    # ring operations ---------------------------------------------------
    def __add__(self, other):
        if self._same(other):
            self._check(other)
            out = dict(self.coeffs)
            for e, c in other.coeffs.items():
                out[e] = out[e] + c if e in out else c
            return self.like(out, min(self.order, other.order), self.log_part + other.log_part)
        if isinstance(other, int) and other == 0:
            return self
        if not self.known(0):
            raise SeriesError("constant term beyond truncation")
        out = dict(self.coeffs)
        out[0] = out[0] + other if 0 in out else other
        return self.like(out, log_part=self.log_part)

    __radd__ = __add__

    def __neg__(self):
        return self.like({e: -c for e, c in self.coeffs.items()},
                         log_part=tuple((-c, s) for c, s in self.log_part))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not self._same(other):
            if isinstance(other, int) and other == 0:
                return self.like({})
            return self.like({e: c * other for e, c in self.coeffs.items()},
                             log_part=tuple((c * other, s) for c, s in self.log_part))
        self._check(other)
        if self.log_part or other.log_part:
            raise SeriesError("products of logarithmic series are not supported")
        order = min(self.order + other.valuation, other.order + self.valuation)
        d = self.direction
        out: dict[int, Any] = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = ea + eb
                if d * e >= order:
                    continue
                p = ca * cb
                out[e] = out[e] + p if e in out else p
        return self.like(out, order)

    def __rmul__(self, other):
        if isinstance(other, int) and other == 0:
            return self.like({})
        return self.like({e: other * c for e, c in self.coeffs.items()},
                         log_part=tuple((other * c, s) for c, s in self.log_part))

    def __truediv__(self, other):
        if self._same(other):
            return self * other.inverse()
        if isinstance(other, int):
            other = Fraction(other)
        inv = _inv(other)
        return self * inv

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return self.like({0: 1}, order=self.order - self.valuation)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "TruncSeries":
        """Reciprocal of a series whose leading coefficient is a unit."""
        if self.log_part:
            raise SeriesError("cannot invert a logarithmic series")
        if not self.coeffs:
            raise SeriesError("division by a series with no certified leading term")
        v = self.valuation
        d = self.direction
        lead_e = d * v
        c0inv = _inv(self.coeffs[lead_e])
        n_terms = self.order - v  # number of certified keys beyond the leading one, plus one
        a = {self.key(e) - v: c for e, c in self.coeffs.items()}
        b: list[Any] = [c0inv]
        for n in range(1, n_terms):
            acc = None
            for j in range(1, n + 1):
                aj = a.get(j)
                if aj is None:
                    continue
                term = aj * b[n - j]
                acc = term if acc is None else acc + term
            b.append(0 if acc is None else -(c0inv * acc))
        out = {d * (k - v): c for k, c in enumerate(b)}
        return self.like(out, order=self.order - 2 * v)

    def derivative(self) -> "TruncSeries":
        out = {e - 1: e * c for e, c in self.coeffs.items() if e != 0}
        for c, _ in self.log_part:
            out[-1] = out[-1] + c if -1 in out else c
        return self.like(out, order=self.order - self.direction)

    # analytic operations ------------------------------------------------
    def _reject_logs(self, what: str):
        if self.log_part:
            raise SeriesError(f"{what} rejects series with logarithmic terms")

    def exp(self) -> "TruncSeries":
        """exp(f) for f of positive valuation (no constant term)."""
        self._reject_logs("exp")
        v = self.valuation
        if v <= 0 and self.coeffs:
            raise SeriesError("exp needs positive filtration degree (no constant or growing terms)")
        result = self.like({0: 1})
        if not self.coeffs:
            return result
        term = self.like({0: 1})
        n = 1
        while n * v < self.order:
            term = term * self / n
            result = result + term
            n += 1
        return result

    def log(self) -> "TruncSeries":
        """log(f) for f with constant term 1 and no other non-positive keys."""
        self._reject_logs("log")
        c0 = self.coeffs.get(0, 0)
        if c0 != 1:
            raise SeriesError("log needs constant term 1")
        g = self - 1
        v = g.valuation
        if g.coeffs and v <= 0:
            raise SeriesError("log needs f - 1 of positive valuation")
        result = self.like({})
        if not g.coeffs:
            return result
        term = self.like({0: 1})
        n = 1
        while n * v < self.order:
            term = term * g
            result = result + (term / n if n % 2 else -(term / n))
            n += 1
        return result

    def compose(self, g: "TruncSeries") -> "TruncSeries":
        """Substitute the series ``g`` (in another variable) for ``self.var``.

        If ``self`` is expanded at 0, ``g`` must be small (positive key
        valuation in its own direction); if at infinity, ``g`` must be large.
        """
        self._reject_logs("compose")
        g._reject_logs("compose")
        kappa = g.valuation
        mu = kappa if not self.at_infinity else -kappa
        if mu <= 0:
            raise SeriesError("substitution does not respect the expansion point")
        if not g.known(g.direction * kappa):
            raise SeriesError("substituted series has no certified leading term")
        lead_e = g.direction * kappa
        lead = g.coeffs[lead_e]
        mono = g.like({lead_e: lead})
        rest = (g - mono) * mono.inverse()  # g = lead*u^k (1 + rest)
        one_plus = rest + 1
        order = mu * self.order
        out = g.like({}, order=order)
        for e, c in self.coeffs.items():
            if e == 0:
                out = out + g.like({0: c})
                continue
            # (lead u^k)^e (1 + rest)^e
            if e > 0:
                factor = one_plus ** e
                leadpow = lead ** e if not isinstance(lead, TruncSeries) else lead ** e
            else:
                factor = one_plus.inverse() ** (-e)
                leadpow = _inv(lead ** (-e))
            piece = factor * g.like({lead_e * e: leadpow}, order=factor.order + kappa * e)
            out = out + piece * c
        return out.truncate(order)

    def revert(self, order: int | None = None, var: str | None = None) -> "TruncSeries":
        """Compositional inverse of a near-identity series ``x + lower``.

        At infinity ``f = x + sum_{e<=0} c_e x^e``; at zero ``f = x + O(x^2)``.
        Computed by the fixed point ``g = u - h(g)`` with ``h = f - id``.
        """
        self._reject_logs("revert")
        d = self.direction
        if self.coeffs.get(1, 0) != 1 or any(d * e < d * 1 for e in self.coeffs):
            raise SeriesError("revert needs a near-identity series")
        h = self - self.like({1: 1})
        target = self.order if order is None else order
        ident = TruncSeries({1: 1}, target, var or self.var, self.at_infinity)
        g = ident
        for _ in range(abs(self.order) + abs(target) + 3):
            g_new = (ident - h.compose(g)).truncate(target)
            if _agree(g_new, g):
                g = g_new
                break
            g = g_new
        return g

    def residue(self):
        """Residue of ``f dx`` at the expansion point.

        At 0 this is ``[x^-1] f``; at infinity it is ``-[x^-1] f``.
        """
        if self.log_part:
            raise SeriesError("residue of a logarithmic series")
        if not self.known(-1):
            raise SeriesError("truncation too shallow to certify the x^-1 coefficient")
        c = self.coeffs.get(-1, 0)
        return -c if self.at_infinity else c

    def integrate(self, constant=0) -> "TruncSeries":
        """Term-wise antiderivative; an ``x^-1`` term becomes ``c log x``."""
        out = {}
        logs = list(self.log_part)
        if self.log_part:
            raise SeriesError("integration of logarithmic series is not supported")
        for e, c in self.coeffs.items():
            if e == -1:
                logs.append((c, f"log({self.var})"))
            else:
                out[e + 1] = c * Fraction(1, e + 1)
        res = self.like(out, order=self.order + self.direction, log_part=logs)
        if constant:
            res = res + constant
        return res

    # comparisons -------------------------------------------------------
    def agrees_with(self, other: "TruncSeries") -> bool:
        return _agree(self, other)

    def difference_witness(self, other: "TruncSeries"):
        """First exponent (in certified order) at which the two series differ."""
        self._check(other)
        order = min(self.order, other.order)
        keys = sorted({self.key(e) for e in self.coeffs} | {other.key(e) for e in other.coeffs})
        for k in keys:
            if k >= order:
                break
            e = self.direction * k
            if self.coeffs.get(e, 0) - other.coeffs.get(e, 0):
                return e
        return None

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(f"({c})*{self.var}^{e}" for e, c in
                              sorted(self.coeffs.items(), key=lambda kv: self.key(kv[0])))
        big = f"O({self.var}^{self.direction * self.order})"
        logs = "".join(f" + ({c})*{s}" for c, s in self.log_part)
        return f"{body}{logs} + {big}"


def _agree(a: TruncSeries, b: TruncSeries) -> bool:
    if a.log_part != b.log_part:
        diff = _log_diff(a.log_part, b.log_part)
        if diff:
            return False
    return a.difference_witness(b) is None


def _log_diff(la, lb):
    acc: dict[str, Any] = {}
    for c, s in la:
        acc[s] = acc.get(s, 0) + c
    for c, s in lb:
        acc[s] = acc.get(s, 0) - c
    return {s: c for s, c in acc.items() if c}


def series_from_poly(coeffs: dict[int, Any], order: int, var: str = "z",
                     at_infinity: bool = False) -> TruncSeries:
    return TruncSeries(dict(coeffs), order, var, at_infinity)


def exp_coefficients(n: int) -> list[Fraction]:
    return [Fraction(1, factorial(k)) for k in range(n)]
