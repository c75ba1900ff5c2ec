"""Bilinear expansion of vertex-operator kernels acting on tau data.

A vertex operator built from linear Hamiltonians acts on one tensor factor
by a multiplication ``exp(sum_v mult[v] q_v)`` (applied last) and a shift
``q_v -> q_v + shift[v]`` (applied first).  After the substitution
``q' = x + c u``, ``q'' = x - c u`` (``c = 1`` for descendant kernels and
``c = eps`` for ancestor kernels) a bilinear term becomes

    prefactor * exp(G(x)) * exp(small(x, u, ...))

where ``G`` collects the ungraded part (the values of log tau at ``x``)
and ``small`` has strictly positive filtration.  The second factor is
expanded with a monotone pruning predicate supplied by a
:class:`Grading`.

Variables: Fock coordinates ``v`` become ``x:v`` and ``y:v``; the spectral
parameter is ``lam``; ``eps`` is the genus grading; plane-wave test
functions use variables prefixed ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .fock import EPS, level, parse_var
from .mpoly import MPoly, _mono_mul

LAM = "lam"
COORDINATES = ("q", "t", "y")


def is_coordinate(v: str) -> bool:
    p = parse_var(v)
    return p is not None and p[0] in COORDINATES


def xv(v: str) -> str:
    return "x:" + v


def yv(v: str) -> str:
    return "y:" + v


def base_var(v: str) -> str:
    return v[2:] if v[:2] in ("x:", "y:") else v


@dataclass(frozen=True)
class HalfKernel:
    """Action on one tensor factor: shift first, then multiply."""

    mult: dict = field(default_factory=dict)   # var -> MPoly coefficient of q_var in the exponent
    shift: dict = field(default_factory=dict)  # var -> MPoly added to q_var
    scalar: MPoly = field(default_factory=MPoly)

    def then(self, o: "HalfKernel") -> "HalfKernel":
        """Operator product ``o * self``: first self, then o.

        e^{m2 q} T2 e^{m1 q} T1 = e^{m2 q} e^{m1 (q + s2)} T2 T1
        """
        mult = dict(self.mult)
        for v, c in o.mult.items():
            mult[v] = mult[v] + c if v in mult else c
        shift = dict(self.shift)
        for v, c in o.shift.items():
            shift[v] = shift[v] + c if v in shift else c
        scalar = self.scalar + o.scalar
        for v, c in self.mult.items():
            if v in o.shift:
                scalar = scalar + c * o.shift[v]
        return HalfKernel(mult, shift, scalar)

    def split_shift(self, is_const: Callable[[tuple], bool]):
        """(constant shifts, remaining kernel)."""
        const, rest = {}, {}
        for v, c in self.shift.items():
            a = c.filter(is_const)
            b = c - a
            if a:
                const[v] = a
            if b:
                rest[v] = b
        return const, HalfKernel(self.mult, rest, self.scalar)


@dataclass(frozen=True)
class BilinearTerm:
    coeff: MPoly
    left: HalfKernel
    right: HalfKernel
    tau_left: MPoly
    tau_right: MPoly
    tag: tuple = ()


@dataclass(frozen=True)
class Grading:
    """Which monomials are small, and which to keep.

    ``keep`` must be monotone under multiplication by small monomials.
    """

    is_small: Callable[[tuple], bool]
    keep: Callable[[tuple], bool]
    max_steps: int


def _deg(m, pred) -> int:
    return sum(e for v, e in m if pred(v))


def is_u(v: str) -> bool:
    return v.startswith("y:")


def is_x(v: str) -> bool:
    return v.startswith("x:")


def is_eta(v: str) -> bool:
    return v.startswith("eta")


def lam_exp(m) -> int:
    for v, e in m:
        if v == LAM:
            return e
    return 0


def eps_exp(m) -> int:
    for v, e in m:
        if v == EPS:
            return e
    return 0


def descendant_grading(y_degree: int, eta_degree: int, levels: int, target: int) -> Grading:
    """Small: u-, eta-dependent or lam-negative; keep monomials able to reach lam^target."""
    top = levels + 1

    def small(m):
        # eta times x alone is a common plane-wave factor, kept ungraded
        if _deg(m, is_u) > 0 or lam_exp(m) < 0:
            return True
        return _deg(m, is_eta) > 0 and _deg(m, is_x) == 0

    def keep(m):
        du = _deg(m, is_u)
        if du > y_degree or _deg(m, is_eta) > eta_degree:
            return False
        return lam_exp(m) + (y_degree - du) * top >= target

    steps = y_degree + eta_degree + max(y_degree * top - target, 0) + 1
    return Grading(small, keep, steps)


def ancestor_grading(y_degree: int, x_degree: int, eps_order: int) -> Grading:
    def small(m):
        return _deg(m, is_u) > 0 or _deg(m, is_x) > 0 or eps_exp(m) > 0

    def keep(m):
        return (_deg(m, is_u) <= y_degree and _deg(m, is_x) <= x_degree
                and eps_exp(m) <= eps_order)

    return Grading(small, keep, y_degree + x_degree + eps_order + 1)


def exp_pruned(p: MPoly, grading: Grading) -> MPoly:
    out = MPoly.const(1)
    term = MPoly.const(1)
    for n in range(1, grading.max_steps + 1):
        term = term.mul_trunc(p, grading.keep) * Fraction(1, n)
        if not term:
            break
        out = out + term
    else:
        if term:
            raise OverflowError("exponential did not terminate within the grading bound")
    return out


class CutOverflow(ArithmeticError):
    """The exponent has a part that no cut can make finite."""


def _substituted(L: MPoly, sign: int, c: MPoly, shift: dict, u_levels: int) -> MPoly:
    """L(x + sign*c*u + shift), with u specialised to zero above ``u_levels``."""
    mapping = {}
    for v in L.variables():
        if not is_coordinate(v):
            continue
        e = MPoly.var(xv(v))
        if level(v) <= u_levels:
            e = e + MPoly.var(yv(v)) * c * sign
        if v in shift:
            e = e + shift[v]
        mapping[v] = e
    return L.subs(mapping)


def _mult_part(h: HalfKernel, sign: int, c: MPoly, u_levels: int) -> MPoly:
    out = MPoly()
    for v, coeff in h.mult.items():
        if level(v) > u_levels:
            # u^{(v)} is specialised to zero above the retained levels;
            # the x-part cancels between the two factors in every kernel used here
            e = MPoly.var(xv(v))
        else:
            e = MPoly.var(xv(v)) + MPoly.var(yv(v)) * c * sign
        out = out + coeff * e
    return out


@dataclass
class TermExpansion:
    G: MPoly        # ungraded exponent (log tau values and x-only terms)
    series: MPoly   # prefactor times expanded small exponential
    tag: tuple = ()


def expand_term(t: BilinearTerm, c: MPoly, grading: Grading, u_levels: int,
                is_const_shift: Callable[[tuple], bool]) -> TermExpansion:
    cl, left = t.left.split_shift(is_const_shift)
    cr, right = t.right.split_shift(is_const_shift)
    tl = _apply_const_shift(t.tau_left, cl)
    tr = _apply_const_shift(t.tau_right, cr)
    # the multiplication acts after the shift, so moving constant shifts
    # into tau leaves it untouched
    scal = left.scalar + right.scalar
    expo = (_substituted(tl, 1, c, left.shift, u_levels)
            + _substituted(tr, -1, c, right.shift, u_levels)
            + _mult_part(left, 1, c, u_levels) + _mult_part(right, -1, c, u_levels) + scal)
    G_terms, small_terms = {}, {}
    for m, coef in expo.terms.items():
        if grading.is_small(m):
            small_terms[m] = coef
        elif lam_exp(m) == 0:
            G_terms[m] = coef
        else:
            raise CutOverflow(f"exponent term {m} grows in lam without a small factor")
    small = MPoly(small_terms).filter(grading.keep)
    series = (exp_pruned(small, grading) * t.coeff).filter(grading.keep) if t.coeff else MPoly()
    return TermExpansion(MPoly(G_terms), series, t.tag)


def _apply_const_shift(L: MPoly, shift: dict) -> MPoly:
    if not shift:
        return L
    mapping = {v: MPoly.var(v) + s for v, s in shift.items() if v in L.variables()}
    return L.subs(mapping) if mapping else L


@dataclass
class Residual:
    """Sum of groups exp(G_j) * R_j; zero iff each group vanishes."""

    groups: list  # list of (G, R)

    def is_zero(self) -> bool:
        return all(not R for _, R in self.groups)

    def witness(self):
        for G, R in self.groups:
            if R:
                m, c = min(R.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
                return {"prefactor_exponent": repr(G), "monomial": repr(m), "coefficient": str(c)}
        return None

    def total(self) -> MPoly:
        out = MPoly()
        for _, R in self.groups:
            out = out + R
        return out


def combine(expansions: Iterable[TermExpansion], extract: Callable[[MPoly], MPoly]) -> Residual:
    groups: list = []
    for e in expansions:
        R = extract(e.series)
        for i, (G, acc) in enumerate(groups):
            if not (G - e.G):
                groups[i] = (G, acc + R)
                break
        else:
            groups.append((e.G, R))
    return Residual(groups)


def lam_coefficient(p: MPoly, e: int) -> MPoly:
    return p.coeff_of(LAM, e)


def filter_u_degree(p: MPoly, y_degree: int) -> MPoly:
    return p.filter(lambda m: _deg(m, is_u) <= y_degree)


def mono_mul(a, b):
    return _mono_mul(a, b)
