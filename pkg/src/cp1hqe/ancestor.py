"""Ancestor-side HQE: per-coefficient rational 1-forms in the mirror coordinate.

With ``t' = x + eps u`` and ``t'' = x - eps u`` the kernel
``Gamma^{chi0} x Gamma^{-chi0}`` acts on ``T x T`` (``T`` tame, in the
coordinates ``t_k_i``) as

    exp(-2 sum_l sum_i I^{(-l-1)}_i u_{l,i} / nu_i)
      * T(x + eps u + eps a) T(x - eps u - eps a) / T(x)^2,   a_{n,i} = (-1)^n I^{(n)}_i.

Tameness makes every term of the logarithm carry a positive power of
``u``, ``x`` or ``eps``.  The scalar prefactor

    exp{2s/(x nu) + (m-1)/nu (x + s/x - nu log x + t nu0)}

contributes ``x^{-(m-1)}`` exactly, ``exp((m+1)s/(nu x))`` order by order
in ``s`` (the Q-order) and ``exp((m-1)x/nu)`` order by order in an
auxiliary h-order; the constant ``exp((m-1) t nu0/nu)`` drops out.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .bilinear import ancestor_grading, exp_pruned, is_coordinate, xv, yv
from .fock import FockElement, eps, is_tame, level, parse_var, tvar
from .loop import nu_index
from .mpoly import MPoly
from .params import ParamField
from .ratfun import Poly, QuadExt, RationalFunction, residue_at_root
from .vertex import ancestor_mode_seed, critical_poly, mode_ladder, sigma


class NonTameInput(ValueError):
    """The exponent has a term of zero filtration weight."""


@dataclass(frozen=True)
class AncestorCuts:
    y_degree: int = 2
    x_degree: int = 1
    eps_order: int = 2
    u_levels: int = 1
    q_order: int = 2
    h_order: int = 1

    def deepen(self, name: str) -> "AncestorCuts":
        d = dict(self.__dict__)
        d[name] += 1
        return AncestorCuts(**d)


def _rf(c) -> RationalFunction:
    return c if isinstance(c, RationalFunction) else RationalFunction(Poly((c,)))


def kernel_exponent(T: FockElement, modes: dict, P: ParamField, cuts: AncestorCuts) -> MPoly:
    """log of the kernel acting on T x T divided by T(x)^2, coefficients rational in x."""
    keep = ancestor_grading(cuts.y_degree, cuts.x_degree, cuts.eps_order).keep
    # partial products are pruned before the eps^{2g-2} factor is attached
    low = min((e for m in T.L.terms for v, e in m if v == EPS_NAME), default=0)
    loose = ancestor_grading(cuts.y_degree, cuts.x_degree, cuts.eps_order - min(low, 0)).keep
    L = T.L.map_coeffs(_rf)
    mapping_l, mapping_r = {}, {}
    for v in L.variables():
        if not is_coordinate(v):
            continue
        _, n, i = parse_var(v)
        if n not in modes:
            raise KeyError(f"mode I^({n}) needed for {v}")
        a = modes[n].value[i] * (-1) ** n
        base = MPoly.var(xv(v))
        w = MPoly({}) if n > cuts.u_levels else MPoly.var(yv(v))
        shift = MPoly({((EPS_NAME, 1),): a}) if a else MPoly()
        mapping_l[v] = base + (w * eps() + shift)
        mapping_r[v] = base - (w * eps() + shift)
    base = L.subs({v: MPoly.var(xv(v)) for v in mapping_l})
    expo = (L.subs(mapping_l, loose) + L.subs(mapping_r, loose)).filter(keep) - base.filter(keep) * 2
    for l in range(cuts.u_levels + 1):
        for i in ("0", "inf"):
            c = modes[-l - 1].value[i] * Fraction(-2) / nu_index(i, P)
            if c:
                expo = expo + MPoly({((yv(tvar(l, i)), 1),): c})
    return expo


EPS_NAME = "eps"


def kernel_series(T: FockElement, modes: dict, P: ParamField, cuts: AncestorCuts) -> MPoly:
    """exp of :func:`kernel_exponent` truncated at the cuts."""
    grading = ancestor_grading(cuts.y_degree, cuts.x_degree, cuts.eps_order)
    expo = kernel_exponent(T, modes, P, cuts)
    bad = [m for m in expo.terms if not grading.is_small(m)]
    if bad:
        raise NonTameInput(f"exponent terms without positive filtration: {bad[:3]}")
    return exp_pruned(expo.filter(grading.keep), grading)


def ancestor_modes(P: ParamField, T: FockElement, cuts: AncestorCuts, fixed_point: str = "0") -> dict:
    top = max((level(v) for v in T.L.variables() if is_coordinate(v)), default=0)
    return mode_ladder(ancestor_mode_seed(P, fixed_point), P, -cuts.u_levels - 1, max(top, 0))


@dataclass
class FormResidues:
    at_zero: object
    at_infinity: object
    at_root: QuadExt
    at_conjugate_root: QuadExt

    def hqe_value(self):
        return self.at_zero + self.at_infinity

    def four_point_sum(self) -> QuadExt:
        return self.at_root + self.at_conjugate_root + self.hqe_value()


def prefactor_parts(P: ParamField, m: int, k: int, j: int):
    """(constant, x-exponent) of the order-(k, j) prefactor times dx/x^2.

    The constant exp((m-1) t nu0/nu) is common to every form and dropped.
    """
    c = ((m + 1) * P.s / P.nu) ** k * Fraction(1, factorial(k)) \
        * ((m - 1) / P.nu) ** j * Fraction(1, factorial(j))
    return c, -(m - 1) - k + j - 2


def x_power(e: int) -> RationalFunction:
    if e >= 0:
        return RationalFunction(Poly([0] * e + [1]))
    return RationalFunction(Poly((1,)), Poly([0] * (-e) + [1]))


def _binom(e: int, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out = out * (e - i) / (i + 1)
    return out


@dataclass
class PoleData:
    """Expansions of one rational coefficient at 0, infinity and both critical roots."""

    at_zero: object
    at_infinity: object
    roots: list  # [(r, v, h)] with f = h(u) / u^v near x = r + u

    @classmethod
    def of(cls, f: RationalFunction, P: ParamField, e_min: int, e_max: int,
           fixed_point: str = "0") -> "PoleData":
        if not isinstance(f, RationalFunction):
            f = RationalFunction(Poly((f,)))
        crit = critical_poly(P, fixed_point)
        p, q = -crit.c[1], -crit.c[0]
        roots = []
        for conj in (False, True):
            roots.append(_root_expansion(f, p, q, conj))
        return cls(f.expand(max(-e_min, 1), "x"), f.expand(max(e_max + 2, 1), "x", at_infinity=True), roots)

    def residues(self, e: int, const) -> FormResidues:
        r0 = self.at_zero.coeffs.get(-1 - e, 0) * const
        rinf = -self.at_infinity.coeffs.get(-1 - e, 0) * const
        out = []
        for r, v, h in self.roots:
            acc = r * 0
            for i in range(v):
                hi = h.get(i)
                if hi is None:
                    continue
                jj = v - 1 - i
                acc = acc + hi * (r ** (e - jj)) * _binom(e, jj)
            out.append(acc * const)
        return FormResidues(r0, rinf, out[0], out[1])


def _root_expansion(f: RationalFunction, p, q, conjugate: bool):
    from .ratfun import _taylor_at
    from .series import TruncSeries
    D = Poly((-q, -p, 1))
    rest, v = f.den, 0
    while rest.deg >= 2:
        quo, rem = rest.divmod(D)
        if rem:
            break
        rest, v = quo, v + 1
    r = QuadExt(0, 1, p, q)
    if conjugate:
        r = r.conjugate()
    if v == 0:
        return r, 0, {}
    gap = r - r.conjugate()
    other = TruncSeries({0: gap, 1: QuadExt(1, 0, p, q)}, v, "u") ** v
    nser = TruncSeries({i: c for i, c in enumerate(_taylor_at(f.num, r, v)) if c}, v, "u")
    rser = TruncSeries({i: c for i, c in enumerate(_taylor_at(rest, r, v)) if c}, v, "u")
    h = (nser * (rser * other).inverse()).coeffs
    return r, v, dict(h)


def residues(f: RationalFunction, P: ParamField, fixed_point: str = "0") -> FormResidues:
    """Residues of f dx at 0, infinity and both critical roots (direct)."""
    crit = critical_poly(P, fixed_point)
    p, q = -crit.c[1], -crit.c[0]
    return FormResidues(f.residue_at_zero(), f.residue_at_infinity(),
                        residue_at_root(f, p, q), residue_at_root(f, p, q, conjugate=True))


@dataclass
class AncestorReport:
    m: int
    cuts: AncestorCuts
    forms: dict = field(default_factory=dict)  # (monomial, k, j) -> (coefficient, x-exponent, constant)
    residues: dict = field(default_factory=dict)

    def form(self, key) -> RationalFunction:
        c, e, const = self.forms[key]
        return c * x_power(e) * const

    def residue_theorem_holds(self) -> bool:
        return all(not r.four_point_sum() for r in self.residues.values())

    def hqe_holds(self) -> bool:
        return all(not r.hqe_value() for r in self.residues.values())


def hqe_ancestor_residual(T: FockElement, m: int, P: ParamField, cuts: AncestorCuts = AncestorCuts(),
                          fixed_point: str = "0", check_tame: bool = True) -> AncestorReport:
    """Coefficient forms of the ancestor HQE and their residues.

    Each retained (u, x, eps)-monomial times each (Q-order k, h-order j)
    gives one rational 1-form in the mirror coordinate.
    """
    return hqe_ancestor_reports(T, (m,), P, cuts, fixed_point, check_tame)[m]


def hqe_ancestor_reports(T: FockElement, ms, P: ParamField, cuts: AncestorCuts = AncestorCuts(),
                         fixed_point: str = "0", check_tame: bool = True) -> dict:
    """:func:`hqe_ancestor_residual` for several m sharing one kernel expansion."""
    if check_tame and not is_tame(T):
        raise NonTameInput("tau datum violates the tameness bound")
    sigma(fixed_point)
    modes = ancestor_modes(P, T, cuts, fixed_point)
    series = kernel_series(T, modes, P, cuts)
    parts, reps = {}, {}
    for m in ms:
        reps[m] = AncestorReport(m, cuts)
        orders = [(k, j) for k in range(cuts.q_order + 1) for j in range(cuts.h_order + 1 if m != 1 else 1)]
        for kj in orders:
            const, e = prefactor_parts(P, m, *kj)
            if const:
                parts[(m,) + kj] = (const, e)
    if not parts:
        return reps
    e_min = min(e for _, e in parts.values())
    e_max = max(e for _, e in parts.values())
    for mono, c in series.terms.items():
        pd = PoleData.of(c, P, e_min, e_max, fixed_point)
        for (m, k, j), (const, e) in parts.items():
            key = (mono, k, j)
            reps[m].forms[key] = (c, e, const)
            reps[m].residues[key] = pd.residues(e, const)
    return reps


def stable_under(shallow: AncestorReport, deep: AncestorReport) -> bool:
    """Coefficient forms of the shallow report reappear unchanged in the deep one.

    Keys absent from the deep report are allowed only if they vanish there.
    """
    for key, (c, e, const) in shallow.forms.items():
        g = deep.forms.get(key)
        if g is None or g[1] != e or g[2] != const or not _rf(c).equals(_rf(g[0])):
            return False
    for key, g in deep.forms.items():
        mono, k, j = key
        if _within(mono, k, j, shallow.cuts) and key not in shallow.forms and g[0]:
            return False
    return True


def _within(mono, k, j, cuts: AncestorCuts) -> bool:
    du = sum(e for v, e in mono if v.startswith("y:"))
    dx = sum(e for v, e in mono if v.startswith("x:"))
    de = sum(e for v, e in mono if v == EPS_NAME)
    lv = max((level(v[2:]) for v, _ in mono if v.startswith("y:")), default=-1)
    return (du <= cuts.y_degree and dx <= cuts.x_degree and de <= cuts.eps_order
            and lv <= cuts.u_levels and k <= cuts.q_order and j <= cuts.h_order)


def random_tame(P: ParamField, rng: random.Random, genus: int = 1, degree: int = 3,
                levels: int = 1, terms: int = 4) -> FockElement:
    """A random tame datum in t-coordinates with small rational coefficients."""
    variables = [tvar(k, i) for k in range(levels + 1) for i in ("0", "inf")]
    Fg: dict = {}
    for g in range(genus + 1):
        F = MPoly()
        tries = 0
        while len(F.terms) < terms and tries < 200:
            tries += 1
            r = rng.randint(1, degree)
            mono = [rng.choice(variables) for _ in range(r)]
            ks = sum(parse_var(v)[1] for v in mono)
            if ks > 3 * g - 3 + r:
                continue
            term = MPoly.const(P.const(Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4))))
            for v in mono:
                term = term * MPoly.var(v)
            F = F + term
        Fg[g] = F
    return FockElement.from_genus(Fg)
