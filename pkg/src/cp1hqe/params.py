"""Coefficient fields.

Every computation runs over a :class:`ParamField` exposing the formal
parameters ``nu0, nuinf, t, s, Q`` (``s`` stands for ``Q e^t``) and the
derived ``nu = nu0 - nuinf``.  Two realisations exist:

* symbolic: the rational function field Q(nu0, nuinf, t, s, Q) backed by
  sympy's sparse fraction field (canonical reduced form, exact equality);
* numeric: the parameters specialised to random rationals drawn from a
  seeded generator, values are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from sympy import QQ
from sympy.polys.fields import field as sympy_field

PARAM_NAMES = ("nu0", "nuinf", "t", "s", "Q")


@dataclass(frozen=True)
class ParamField:
    """A coefficient field together with distinguished parameter values."""

    nu0: Any
    nuinf: Any
    t: Any
    s: Any
    Q: Any
    symbolic: bool
    seed: int | None = None
    point: dict = field(default_factory=dict)
    _ring: Any = None

    @property
    def nu(self):
        return self.nu0 - self.nuinf

    @property
    def one(self):
        return self.const(1)

    @property
    def zero(self):
        return self.const(0)

    def const(self, value) -> Any:
        if self.symbolic:
            v = Fraction(value)
            return self._ring(QQ(v.numerator, v.denominator))
        return Fraction(value)

    def dt(self, c):
        """Total t-derivative, with s = Q e^t so that ds/dt = s."""
        if not self.symbolic:
            raise ValueError("parameter derivatives need the symbolic field")
        return c.diff(self.t) + self.s * c.diff(self.s)

    def describe(self) -> dict:
        if self.symbolic:
            return {"mode": "symbolic"}
        return {"mode": "randomized", "seed": self.seed,
                "point": {k: str(v) for k, v in self.point.items()}}


def symbolic_field() -> ParamField:
    ring, nu0, nuinf, t, s, Q = sympy_field(",".join(PARAM_NAMES), QQ)
    return ParamField(nu0, nuinf, t, s, Q, symbolic=True, _ring=ring)


def _draw(rng: random.Random) -> Fraction:
    while True:
        v = Fraction(rng.randint(-97, 97), rng.randint(1, 31))
        if v != 0:
            return v


def numeric_field(values: dict, seed: int | None = None) -> ParamField:
    vals = {k: Fraction(values[k]) for k in PARAM_NAMES}
    if vals["nu0"] == vals["nuinf"]:
        raise ValueError("nu0 and nuinf must differ")
    return ParamField(vals["nu0"], vals["nuinf"], vals["t"], vals["s"], vals["Q"],
                      symbolic=False, seed=seed, point=vals)


def random_fields(seed: int, count: int = 5) -> list[ParamField]:
    """``count`` independent generic parameter points from one seed."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        vals = {k: _draw(rng) for k in PARAM_NAMES}
        nu = vals["nu0"] - vals["nuinf"]
        # keep clear of the degenerate loci nu = 0 and a double critical point
        if nu == 0 or nu * nu + 4 * vals["s"] == 0:
            continue
        out.append(numeric_field(vals, seed=seed))
    return out


def is_zero(c) -> bool:
    return not c


def coeff_to_str(c) -> str:
    if isinstance(c, (int, Fraction)):
        return str(Fraction(c))
    return str(c.as_expr())


def coeff_from_str(P: ParamField, text: str):
    if not P.symbolic:
        return Fraction(text)
    from sympy import Symbol, sympify
    return P._ring.from_expr(sympify(text, locals={n: Symbol(n) for n in PARAM_NAMES}))
