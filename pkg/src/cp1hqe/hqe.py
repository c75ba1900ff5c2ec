"""Descendant HQE residuals and their equivalence with the 2-Toda form.

The residue ``Res_{lam=inf} (...) dlam/lam`` is the lam^0 coefficient of
the expanded bilinear expression.  Kernels are built from quantized
exponents, so both sides of every comparison come from independent
code paths: the descendant side from :mod:`cp1hqe.vertex` and
:func:`cp1hqe.fock.quantize_linear`, the Toda side from the closed form
of Gamma^{+-y}.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bilinear import (BilinearTerm, HalfKernel, Residual, combine, descendant_grading,
                       expand_term, lam_coefficient, xv, yv)
from .fock import FockElement, eps, qvar
from .getzler import (TriangularChange, _is_const_shift, chi_exponent_data, lam,
                      toda_shift_direction, toda_tau_sequence, two_toda_hqe_residual, ytvar)
from .mpoly import MPoly
from .params import ParamField


def descendant_half_kernel(P: ParamField, sign: int, sector: str, levels: int, dlam: int) -> HalfKernel:
    """Gamma^{sign chi_sector}(lam) as shift + multiplication on q."""
    data = chi_exponent_data(P, sign, sector, dlam, levels)
    mult: dict = {}
    shift: dict = {}
    for d, forms in data.mult.items():
        for v, g in forms.items():
            mult[v] = mult.get(v, MPoly()) + lam(d) * eps(-1) * g
    for d, forms in data.deriv.items():
        for v, a in forms.items():
            shift[v] = shift.get(v, MPoly()) + lam(d) * eps(1) * a
    return HalfKernel(mult, shift)


def _shift_L(L: MPoly, amounts: dict) -> MPoly:
    mapping = {v: MPoly.var(v) + eps() * c for v, c in amounts.items() if c and v in L.variables()}
    return L.subs(mapping) if mapping else L


def _qpow(P: ParamField, e: int):
    return P.Q ** e if e >= 0 else (P.one / P.Q) ** (-e)


@dataclass(frozen=True)
class ResidualCuts:
    y_degree: int = 2
    levels: int = 5      # u-levels kept; lam^{1..levels+1} in the multiplication part
    eta_degree: int = 0  # plane-wave degree, when eta variables are present

    def depth(self, n: int, m: int) -> int:
        """Shift depth in lam^{-1} that makes the lam^0 coefficient exact."""
        return self.y_degree * (self.levels + 1) + abs(n - m) + 1


def hqe_descendant_residual(D: FockElement, n: int, m: int, P: ParamField,
                            cuts: ResidualCuts = ResidualCuts(),
                            D_right: FockElement | None = None) -> Residual:
    """Res (lam^{n-m} G^{chi0} x G^{-chi0} - (Q/lam)^{n-m} G^{-chiinf} x G^{chiinf})
    (e^{(n+1)phi0^ + n phiinf^} x e^{m phi0^ + (m+1) phiinf^}) (D x D) dlam/lam.

    ``D_right`` replaces the second tensor factor (kernel probes).
    """
    target = -abs(n - m)
    dl = cuts.depth(n, m)
    grading = descendant_grading(cuts.y_degree, cuts.eta_degree, cuts.levels, target)
    L1 = _shift_L(D.L, {qvar(0, "0"): n + 1, qvar(0, "inf"): n})
    L2 = _shift_L((D if D_right is None else D_right).L, {qvar(0, "0"): m, qvar(0, "inf"): m + 1})
    K = cuts.levels
    terms = [
        BilinearTerm(lam(n - m), descendant_half_kernel(P, 1, "0", K, dl),
                     descendant_half_kernel(P, -1, "0", K, dl), L1, L2, ("chi0",)),
        BilinearTerm(lam(m - n) * (-_qpow(P, n - m)), descendant_half_kernel(P, -1, "inf", K, dl),
                     descendant_half_kernel(P, 1, "inf", K, dl), L1, L2, ("chiinf",)),
    ]
    exps = [expand_term(t, MPoly.const(1), grading, K, _is_const_shift) for t in terms]
    return combine(exps, lambda s: lam_coefficient(s, 0))


# -- plane waves -----------------------------------------------------------------

def eta(k: int, i: str, name: str = "eta") -> MPoly:
    if not name.startswith("eta"):
        raise ValueError("plane-wave variables must carry the eta prefix")
    return MPoly.var(f"{name}_{k}_{i}")


def plane_wave_toda(K_eta: int, name: str = "eta") -> FockElement:
    """exp(sum_k eta_k y_k + etabar_k ybar_k)."""
    L = MPoly()
    for i in ("0", "inf"):
        for k in range(K_eta + 1):
            L = L + eta(k, i, name) * MPoly.var(ytvar(k, i))
    return FockElement(L)


def plane_wave_descendant(change: TriangularChange, K_eta: int, N: int, name: str = "eta") -> FockElement:
    """The same plane wave in q-coordinates: xi_n = sum_k eta_k a_{k,n}, for n <= N."""
    L = MPoly()
    for i in ("0", "inf"):
        for k in range(K_eta + 1):
            for n, a in enumerate(change.a[(i, k)][:N + 1]):
                if a:
                    L = L + eta(k, i, name) * MPoly.var(qvar(n, i)) * a
    return FockElement(L)


def toda_to_q(R: MPoly, change: TriangularChange, levels: int, N: int) -> MPoly:
    """Express a Toda-side result in q-coordinates.

    u-variables are specialised to levels <= ``levels``; x-variables use
    the change truncated at level N.
    """
    mapping = {}
    for v in R.variables():
        for i in ("0", "inf"):
            for k in range(change.K + 1):
                if v == yv(ytvar(k, i)):
                    mapping[v] = _linear({yv(qvar(n, i)): a for n, a in enumerate(change.a[(i, k)])
                                          if n <= levels})
                elif v == xv(ytvar(k, i)):
                    mapping[v] = _linear({xv(qvar(n, i)): a for n, a in enumerate(change.a[(i, k)])
                                          if n <= N})
    missing = [v for v in R.variables() if v not in mapping and (v.startswith("x:") or v.startswith("y:"))]
    if missing:
        raise ValueError(f"change block too small for {missing[:3]}")
    return R.subs(mapping)


def _linear(coeffs: dict) -> MPoly:
    out = MPoly()
    for v, c in coeffs.items():
        if c:
            out = out + MPoly.var(v) * c
    return out


@dataclass
class EquivalenceReport:
    n: int
    m: int
    equal: bool
    descendant_terms: int
    toda_terms: int
    witness: dict | None


def kernel_equivalence(P: ParamField, n: int, m: int, cuts: ResidualCuts = ResidualCuts(eta_degree=2),
                       K_eta: int | None = None) -> EquivalenceReport:
    """Descendant kernel against the 2-Toda kernel on independent plane waves.

    The left factor is exp(eta.y), the right exp(etar.y); on the descendant
    side these read exp(xi.q) with xi = eta a.  Both residuals are
    normalised by the Q-weight of the first term and compared in
    q-coordinates, including the ungraded plane-wave prefactor.
    """
    K_eta = min(cuts.levels, 2) if K_eta is None else K_eta
    N = cuts.depth(n, m) + 1
    change = TriangularChange.build(P, max(K_eta, cuts.levels), N)
    lhs = hqe_descendant_residual(plane_wave_descendant(change, K_eta, N, "eta"), n, m, P, cuts,
                                  plane_wave_descendant(change, K_eta, N, "etar"))
    span = range(min(n, m), max(n, m) + 2)
    direction = toda_shift_direction(P)
    tl = toda_tau_sequence(plane_wave_toda(K_eta, "eta"), span, direction)
    tr = toda_tau_sequence(plane_wave_toda(K_eta, "etar"), span, direction)
    rhs = two_toda_hqe_residual(tl, n, m, P, cuts.y_degree, cuts.levels, cuts.eta_degree, taus_right=tr)
    if len(lhs.groups) != 1 or len(rhs.groups) != 1:
        raise ValueError("plane-wave terms must share one prefactor")
    diff = lhs.groups[0][0] - toda_to_q(rhs.groups[0][0], change, cuts.levels, N)
    a = lhs.total()
    b = toda_to_q(rhs.total(), change, cuts.levels, N)
    diff = diff + (a - b)
    wit = None
    if diff:
        mono, c = min(diff.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
        wit = {"monomial": repr(mono), "difference": str(c)}
    return EquivalenceReport(n, m, not diff, len(a.terms), len(b.terms), wit)
