"""Descendant vertex exponents and the ladder of ancestor modes.

The descendant exponent at the fixed point ``0`` has lambda^d coefficient
``-P_d(z) phi_0`` with ``P_d = 1/prod_{j=1..d}(nu - j z)`` for ``d >= 0``
(expanded at z = infinity) and ``P_{-k-1} = nu (nu + z) ... (nu + k z)``.
The fixed point ``inf`` is obtained by ``nu -> -nu`` and ``phi_0 -> phi_inf``.

Ancestor modes ``I^(n)`` are H-valued rational functions of the mirror
coordinate linked by ``d/dx I^(n) = phi(x) I^(n+1)`` where
``phi = 1 - sigma nu/x - s/x^2`` and ``sigma = +1`` (point 0) or ``-1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .loop import CohClass, LoopVector, phi
from .params import ParamField, coeff_from_str, coeff_to_str
from .ratfun import NonRationalIntegral, Poly, RationalFunction, hermite_reduce, integrate
from .series import SeriesError, TruncSeries


def sigma(fixed_point: str) -> int:
    if fixed_point not in ("0", "inf"):
        raise ValueError(f"fixed point must be '0' or 'inf', got {fixed_point!r}")
    return 1 if fixed_point == "0" else -1


# -- descendant exponents -----------------------------------------------------

def exponent_coefficient(d: int, P: ParamField, fixed_point: str = "0", z_lo: int = -8) -> TruncSeries:
    """Scalar z-series c_d(z) with lambda^d coefficient c_d(z) phi_i of f^{chi_i}."""
    nu = P.nu * sigma(fixed_point)
    order = 1 - z_lo
    if d >= 0:
        den = TruncSeries({0: 1}, order + 2 * d, "z", True)
        for j in range(1, d + 1):
            den = den * TruncSeries({0: nu, 1: -j}, order + 2 * d, "z", True)
        return -(den.inverse().truncate(order))
    k = -d - 1
    prod = TruncSeries({0: nu}, order, "z", True)
    for j in range(1, k + 1):
        prod = prod * TruncSeries({0: nu, 1: j}, order, "z", True)
    return -prod


@dataclass(frozen=True)
class VertexExponent:
    """lambda-graded family of loop vectors: f = sum_d lambda^d f_d(z)."""

    terms: dict
    sign: int
    fixed_point: str
    dlam: int
    z_lo: int

    def __getitem__(self, d: int) -> LoopVector:
        if abs(d) > self.dlam:
            raise SeriesError(f"lambda^{d} outside the retained window")
        return self.terms.get(d, LoopVector({}, self.z_lo))

    def support_ok(self) -> bool:
        """d >= 0 terms live in nonpositive z-powers; d < 0 terms are polynomials of degree |d|-1."""
        for d, f in self.terms.items():
            ks = list(f.coeffs)
            if d >= 0 and any(k > 0 for k in ks):
                return False
            if d < 0 and any(k < 0 or k > -d - 1 for k in ks):
                return False
        return True


def descendant_exponent(P: ParamField, sign: int = 1, fixed_point: str = "0",
                        dlam: int = 6, z_lo: int = -8) -> VertexExponent:
    if dlam < 1:
        raise ValueError("dlam must be at least 1")
    if z_lo > -dlam:
        raise SeriesError(f"z window starting at {z_lo} cannot hold lambda^{dlam}")
    terms = {}
    basis = phi(fixed_point)
    for d in range(-dlam, dlam + 1):
        c = exponent_coefficient(d, P, fixed_point, z_lo)
        terms[d] = LoopVector({e: basis.scale(v * sign) for e, v in c.coeffs.items()}, z_lo)
    return VertexExponent(terms, sign, fixed_point, dlam, z_lo)


# -- rational modes -------------------------------------------------------------

X = RationalFunction.x


@dataclass(frozen=True)
class RationalMode:
    n: int
    fixed_point: str
    value: CohClass  # components are RationalFunctions

    def component(self, i: str) -> RationalFunction:
        return self.value[i]

    def equals(self, o: "RationalMode") -> bool:
        return all(self.value[i].equals(o.value[i]) for i in ("0", "inf"))

    def poles_ok(self, P: ParamField) -> bool:
        """Denominators divide a power of x (x^2 - sigma nu x - s)."""
        crit = critical_poly(P, self.fixed_point)
        for i in ("0", "inf"):
            den = self.value[i].den
            # strip powers of x and crit until nothing is left
            while den.deg > 0 and not den.c[0]:
                den = Poly(den.c[1:])
            while den.deg > 0:
                q, r = den.divmod(crit)
                if r:
                    return False
                den = q
        return True

    def to_json(self) -> str:
        comps = {}
        for i in ("0", "inf"):
            f = self.value[i]
            comps[i] = {"num": [coeff_to_str(c) for c in f.num.c],
                        "den": [coeff_to_str(c) for c in f.den.c]}
        return json.dumps({"n": self.n, "fixed_point": self.fixed_point, "components": comps},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str, P: ParamField) -> "RationalMode":
        d = json.loads(text)
        parts = []
        for i in ("0", "inf"):
            c = d["components"][i]
            parts.append(RationalFunction(Poly([coeff_from_str(P, v) for v in c["num"]]),
                                          Poly([coeff_from_str(P, v) for v in c["den"]])))
        return cls(int(d["n"]), d["fixed_point"], CohClass(*parts))


def critical_poly(P: ParamField, fixed_point: str = "0") -> Poly:
    """x^2 - sigma nu x - s."""
    return Poly((-P.s, -sigma(fixed_point) * P.nu, P.one))


def ladder_factor(P: ParamField, fixed_point: str = "0") -> RationalFunction:
    """phi(x) = 1 - sigma nu/x - s/x^2."""
    return RationalFunction(critical_poly(P, fixed_point), Poly((0, 0, 1)))


def ancestor_mode_seed(P: ParamField, fixed_point: str = "0") -> RationalMode:
    x = X()
    s = P.s
    D = RationalFunction(critical_poly(P, fixed_point))
    main = -(x * x) / D
    side = -(RationalFunction(Poly((s,)))) / D
    value = CohClass(main, side) if fixed_point == "0" else CohClass(side, main)
    return RationalMode(0, fixed_point, value)


def mode_up(m: RationalMode, P: ParamField) -> RationalMode:
    inv = 1 / ladder_factor(P, m.fixed_point)
    return RationalMode(m.n + 1, m.fixed_point, m.value.map(lambda f: f.derivative() * inv))


def _log_coefficient(f: RationalFunction) -> tuple[Any, RationalFunction]:
    """int f = rational + logarithmic part; return (k, residual) with log part k/x + residual."""
    _, _, r, dstar = hermite_reduce(f)
    L = RationalFunction(r, dstar)
    k = L.residue_at_zero() if L else 0
    rest = L - RationalFunction(Poly((k,)), Poly((0, 1))) if L else L
    return k, rest


class IntegrationConstantError(ArithmeticError):
    """No integration constant makes the next downward step rational."""


def _integrate_down(values: CohClass, P: ParamField, fixed_point: str) -> CohClass:
    phi_x = ladder_factor(P, fixed_point)
    return values.map(lambda f: integrate(phi_x * f))


def mode_down(m: RationalMode, P: ParamField) -> RationalMode:
    """I^(n-1) = int phi I^(n) + c with c fixed by one level of lookahead."""
    sg = sigma(m.fixed_point)
    phi_x = ladder_factor(P, m.fixed_point)
    prim = _integrate_down(m.value, P, m.fixed_point)
    consts = []
    for i in ("0", "inf"):
        k, rest = _log_coefficient(phi_x * prim[i])
        if rest:
            raise IntegrationConstantError(
                f"component {i}: logarithmic part {rest} is not removable by a constant")
        consts.append(k / (sg * P.nu))
    value = CohClass(prim.c0 + consts[0], prim.cinf + consts[1])
    return RationalMode(m.n - 1, m.fixed_point, value)


def mode_ladder(seed: RationalMode, P: ParamField, n_min: int, n_max: int,
                lookahead: int = 1) -> dict[int, RationalMode]:
    """Modes I^(n) for n in [n_min, n_max], starting from the seed.

    ``lookahead`` additionally certifies that this many further downward
    steps below ``n_min`` remain rational.
    """
    if not n_min <= seed.n <= n_max:
        raise ValueError("seed index must lie inside the requested range")
    out = {seed.n: seed}
    cur = seed
    for _ in range(seed.n, n_max):
        cur = mode_up(cur, P)
        out[cur.n] = cur
    cur = seed
    for _ in range(n_min, seed.n):
        cur = mode_down(cur, P)
        out[cur.n] = cur
    for _ in range(max(lookahead - 1, 0)):
        cur = mode_down(cur, P)
    return out


def perturbed_descent(m: RationalMode, P: ParamField, delta: CohClass, steps: int = 2) -> int | None:
    """Perturb the constant of the first downward step by ``delta``; return the
    step at which a logarithm becomes unavoidable (None if never within ``steps``)."""
    cur = mode_down(m, P)
    cur = RationalMode(cur.n, cur.fixed_point, CohClass(cur.value.c0 + delta.c0, cur.value.cinf + delta.cinf))
    for step in range(1, steps + 1):
        try:
            prim = _integrate_down(cur.value, P, cur.fixed_point)
        except NonRationalIntegral:
            return step
        # the next level's constant must also be attainable
        phi_x = ladder_factor(P, cur.fixed_point)
        for i in ("0", "inf"):
            _, rest = _log_coefficient(phi_x * prim[i])
            if rest:
                return step + 1
        cur = mode_down(cur, P)
    return None


def reciprocal_substitute(m: RationalMode, P: ParamField) -> CohClass:
    """The mode evaluated at s/x."""
    return m.value.map(lambda f: f.substitute_reciprocal(P.s))


def bar_symmetry_holds(chi0: dict, chiinf: dict, P: ParamField) -> dict[int, bool]:
    """I_inf^(n)(s/x) = -I_0^(n)(x) for each common index."""
    out = {}
    for n in sorted(set(chi0) & set(chiinf)):
        lhs = reciprocal_substitute(chiinf[n], P)
        out[n] = all((lhs[i] + chi0[n].value[i]).num.deg < 0 for i in ("0", "inf"))
    return out


def bar_derivative_factor(P: ParamField) -> RationalFunction:
    """c(x) with d/dx [F(s/x)] = c(x) F^(+1)(s/x) for the ladder of the point inf.

    By the chain rule c(x) = -(s/x^2) phibar(s/x); it is compared against
    phi(x) of the point 0 by the caller.
    """
    phibar = ladder_factor(P, "inf").substitute_reciprocal(P.s)
    return phibar * RationalFunction(Poly((-P.s,)), Poly((0, 0, 1)))


def mode_expand_at_infinity(m: RationalMode, depth: int) -> CohClass:
    """Components expanded at x = infinity, certified through x^(-depth)."""
    return m.value.map(lambda f: f.expand(depth + 1, "x", at_infinity=True))
