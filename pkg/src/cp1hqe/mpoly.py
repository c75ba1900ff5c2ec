"""Sparse multivariate Laurent polynomials with exact coefficients.

Variables are strings.  A monomial is a sorted tuple of ``(var, exp)``
pairs with nonzero (possibly negative) exponents.  Negative exponents are
only meant for grading variables such as ``eps``; differentiation and
substitution assume the variable in question appears with nonnegative
exponents.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        n = d.get(v, 0) + e
        if n:
            d[v] = n
        else:
            d.pop(v, None)
    return tuple(sorted(d.items()))


def _inv(c):
    return Fraction(1, c) if isinstance(c, int) else 1 / c


class MPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Any] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "MPoly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, exp: int = 1, coeff=1) -> "MPoly":
        return cls({((name, exp),): coeff} if exp else {(): coeff})

    @classmethod
    def coerce(cls, o) -> "MPoly":
        return o if isinstance(o, MPoly) else cls.const(o)

    # queries ------------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_const(self) -> bool:
        return all(not m for m in self.terms)

    def const_term(self):
        return self.terms.get((), 0)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self, pred: Callable[[str], bool] = lambda v: True) -> int:
        """Total degree in the variables selected by ``pred`` (-1 for zero)."""
        if not self.terms:
            return -1
        return max(sum(e for v, e in m if pred(v)) for m in self.terms)

    def min_degree(self, pred: Callable[[str], bool] = lambda v: True) -> int:
        if not self.terms:
            return 0
        return min(sum(e for v, e in m if pred(v)) for m in self.terms)

    # arithmetic ---------------------------------------------------------
    def __add__(self, o):
        o = MPoly.coerce(o)
        out = dict(self.terms)
        for m, c in o.terms.items():
            if m in out:
                n = out[m] + c
                if n:
                    out[m] = n
                else:
                    del out[m]
            else:
                out[m] = c
        return MPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-MPoly.coerce(o))

    def __rsub__(self, o):
        return MPoly.coerce(o) - self

    def __mul__(self, o):
        if not isinstance(o, MPoly):
            if not o:
                return MPoly()
            return MPoly({m: c * o for m, c in self.terms.items()})
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                m = _mono_mul(ma, mb)
                p = ca * cb
                if m in out:
                    out[m] = out[m] + p
                else:
                    out[m] = p
        return MPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, MPoly):
            if len(c.terms) != 1:
                raise ZeroDivisionError("division only by monomials")
            (m, k), = c.terms.items()
            return self * MPoly({tuple((v, -e) for v, e in m): _inv(k)})
        return self * _inv(c)

    def __pow__(self, n: int):
        if n < 0:
            return (MPoly.const(1) / self) ** (-n)
        out = MPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def mul_trunc(self, o: "MPoly", keep: Callable[[Monomial], bool]) -> "MPoly":
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                m = _mono_mul(ma, mb)
                if not keep(m):
                    continue
                p = ca * cb
                out[m] = out[m] + p if m in out else p
        return MPoly(out)

    # structure ----------------------------------------------------------
    def map_coeffs(self, fn) -> "MPoly":
        return MPoly({m: fn(c) for m, c in self.terms.items()})

    def filter(self, keep: Callable[[Monomial], bool]) -> "MPoly":
        return MPoly({m: c for m, c in self.terms.items() if keep(m)})

    def diff(self, var: str) -> "MPoly":
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            out[tuple(sorted(d.items()))] = c * e
        return MPoly(out)

    def coeff_of(self, var: str, e: int) -> "MPoly":
        """Coefficient of ``var**e`` as a polynomial in the other variables."""
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.get(var, 0) != e:
                continue
            d.pop(var, None)
            out[tuple(sorted(d.items()))] = c
        return MPoly(out)

    def by_power(self, var: str) -> dict[int, "MPoly"]:
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(var, 0)
            out.setdefault(e, {})[tuple(sorted(d.items()))] = c
        return {e: MPoly(t) for e, t in out.items()}

    def subs(self, mapping: Mapping[str, "MPoly"],
             keep: Callable[[Monomial], bool] | None = None) -> "MPoly":
        """Simultaneous substitution of polynomials for variables.

        ``keep`` prunes monomials as they are formed; it must be monotone
        (a monomial that fails keeps failing after further multiplication).
        """
        cache: dict = {}

        def power(v, e):
            key = (v, e)
            if key not in cache:
                if e < 0:
                    raise ValueError(f"cannot substitute into negative power of {v}")
                cache[key] = mapping[v] ** e
            return cache[key]

        acc: dict = {}
        for m, c in self.terms.items():
            rest = []
            piece = MPoly.const(c)
            for v, e in m:
                if v in mapping:
                    piece = piece * power(v, e) if keep is None else piece.mul_trunc(power(v, e), keep)
                else:
                    rest.append((v, e))
            rest = tuple(rest)
            for pm, pc in piece.terms.items():
                mm = _mono_mul(pm, rest)
                if keep is not None and not keep(mm):
                    continue
                acc[mm] = acc[mm] + pc if mm in acc else pc
        return MPoly(acc)

    def equals(self, o) -> bool:
        return not (self - MPoly.coerce(o))

    def __eq__(self, o):
        if isinstance(o, (MPoly, int, Fraction)):
            return self.equals(o)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def exp_filtered(p: MPoly, weight: Callable[[Monomial], int], cut: int) -> MPoly:
    """exp(p) keeping monomials of weight <= cut; p must have weight >= 1."""
    if any(weight(m) < 1 for m in p.terms):
        raise ValueError("exponential needs strictly positive filtration weight")
    keep = lambda m: weight(m) <= cut
    out = MPoly.const(1)
    term = MPoly.const(1)
    for n in range(1, cut + 1):
        term = term.mul_trunc(p, keep) * Fraction(1, n)
        if not term:
            break
        out = out + term
    return out


def from_terms(items: Iterable[tuple[dict, Any]]) -> MPoly:
    out = MPoly()
    for mono, c in items:
        out = out + MPoly({tuple(sorted((v, e) for v, e in mono.items() if e)): c})
    return out
