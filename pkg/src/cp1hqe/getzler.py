"""Triangular change between descendant coordinates and 2-Toda times.

The times ``y_k`` (sector ``0``) and ``ybar_k`` (sector ``inf``) are
related to ``q_{n,i}`` by

    sum_n (-w)^{-n-1} d/dq_{n,0} = sum_k d/dy_k / (nu (nu - w) ... (nu - (k+1) w))

so that ``y_k = sum_{n >= k} a_{k,n} q_{n,0}``.  The inverse is given by
bracket numbers (unsigned Stirling numbers of the first kind).  The sector
``inf`` uses ``nu -> -nu``.

Toda times are the Fock-style variables ``y_k_0`` and ``y_k_inf``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bilinear import (LAM, BilinearTerm, HalfKernel, Residual, combine, descendant_grading,
                       expand_term, lam_coefficient, lam_exp)
from .fock import EPS, FockElement, eps, parse_var, qvar, quantize_linear
from .loop import LoopVector, phi
from .mpoly import MPoly
from .params import ParamField
from .series import TruncSeries
from .vertex import exponent_coefficient, sigma


def ytvar(k: int, i: str) -> str:
    return f"y_{k}_{i}"


def lam(e: int) -> MPoly:
    return MPoly.var(LAM, e)


# -- bracket numbers ------------------------------------------------------------

def bracket_number(k: int, i: int) -> int:
    """Coefficient of nu^i z^(k-i) in nu (nu + z) ... (nu + (k-1) z)."""
    if not 1 <= i <= k:
        raise ValueError(f"bracket [{k} {i}] needs 1 <= i <= k")
    # with nu = 1 the product is prod_{j<k} (1 + j z)
    poly = [1]
    for j in range(k):
        nxt = poly + [0]
        for e, c in enumerate(poly):
            nxt[e + 1] += j * c
        poly = nxt
    return poly[k - i]


# -- the change ----------------------------------------------------------------

def _nu(P: ParamField, sector: str):
    return P.nu * sigma(sector)


def a_coefficients(P: ParamField, k: int, N: int, sector: str = "0") -> list:
    """[a_{k,0}, ..., a_{k,N}] from the expansion of 1/(nu (nu-w)...(nu-(k+1)w)) at w = infinity."""
    if N < k:
        raise ValueError("row length N must be at least k")
    nu = _nu(P, sector)
    order = N + 2
    den = TruncSeries({0: nu}, order + 2 * (k + 1), "w", True)
    for j in range(1, k + 2):
        den = den * TruncSeries({0: nu, 1: -j}, order + 2 * (k + 1), "w", True)
    g = den.inverse().truncate(order)
    # coefficient of w^{-n-1} equals a_{k,n} (-1)^{n+1}
    return [g[-n - 1] * (-1) ** (n + 1) for n in range(N + 1)]


def getzler_inverse(P: ParamField, k: int, sector: str = "0") -> dict:
    """{n: B_{n,k}} with d/dy_k = sum_n B_{n,k} d/dq_{n,sector}."""
    nu = _nu(P, sector)
    return {k + 1 - i: (nu ** i) * (k + 1) * bracket_number(k + 1, i) for i in range(1, k + 2)}


@dataclass(frozen=True)
class TriangularChange:
    """a_{k,n} for k <= K, n <= N in both sectors, with the inverse block."""

    K: int
    N: int
    a: dict     # (sector, k) -> list over n
    B: dict     # (sector, k) -> {n: B_{n,k}}

    @classmethod
    def build(cls, P: ParamField, K: int, N: int | None = None) -> "TriangularChange":
        N = K if N is None else N
        a = {(i, k): a_coefficients(P, k, N, i) for i in ("0", "inf") for k in range(K + 1)}
        B = {(i, k): getzler_inverse(P, k, i) for i in ("0", "inf") for k in range(K + 1)}
        return cls(K, N, a, B)

    def is_triangular(self) -> bool:
        return all(not row[n] for (i, k), row in self.a.items() for n in range(min(k, len(row))))

    def block_identity(self) -> bool:
        """sum_n B_{n,k} a_{j,n} = delta_{jk} on the retained block."""
        for i in ("0", "inf"):
            for k in range(self.K + 1):
                for j in range(min(self.K, self.N) + 1):
                    acc = sum((c * self.a[(i, j)][n] for n, c in self.B[(i, k)].items()
                               if n <= self.N), 0)
                    if acc != (1 if j == k else 0):
                        return False
        return True

    def y_form(self, k: int, sector: str) -> dict:
        """y_k as {q variable: coefficient}, truncated at level N."""
        return {qvar(n, sector): c for n, c in enumerate(self.a[(sector, k)]) if c}


def a_partial_fraction_oracle(P: ParamField, k: int, N: int, sector: str = "0") -> list:
    """Independent row via 1/(nu (nu-w)...(nu-(k+1)w)) = sum_j A_j/(nu - j w)."""
    nu = _nu(P, sector)
    row = [P.zero] * (N + 1)
    # j = 0 term: the constant factor 1/nu times the product over j >= 1
    # A_j = 1 / prod_{i != j, 0 <= i <= k+1} (nu - i nu/j)   evaluated at w = nu/j
    for j in range(1, k + 2):
        A = P.one / nu
        for i in range(1, k + 2):
            if i != j:
                A = A / (nu - Fraction(i, j) * nu)
        # 1/(nu - j w) = -sum_m nu^m / (j^{m+1} w^{m+1})
        for m in range(N + 1):
            coeff_w = -A * nu ** m / Fraction(j) ** (m + 1)
            row[m] = row[m] + coeff_w * (-1) ** (m + 1)
    return row


# -- operator identities ---------------------------------------------------------

def _scalar_vector(c: TruncSeries, sector: str, lo: int | None) -> LoopVector:
    return LoopVector({e: phi(sector).scale(v) for e, v in c.coeffs.items()}, lo)


def negative_term_identity(P: ParamField, k: int, sector: str = "0") -> bool:
    """(-nu(nu+z)...(nu+kz) phi_i)^ = -eps d/dy_k / (k+1), compared as derivations in q."""
    f = _scalar_vector(exponent_coefficient(-k - 1, P, sector), sector, None)
    op = quantize_linear(f, P)
    if any(bool(c) for c in op.gamma.values()):
        return False
    B = getzler_inverse(P, k, sector)
    want = {(n, sector): -c / (k + 1) for n, c in B.items()}
    keys = set(op.alpha) | set(want)
    return all(op.alpha.get(key, 0) == want.get(key, 0) for key in keys)


def positive_term_identity(P: ParamField, k: int, N: int, sector: str = "0") -> bool:
    """(-1/((nu-z)...(nu-(k+1)z)) phi_i)^ = y_k/eps through q-level N."""
    z_lo = -N - 1
    f = _scalar_vector(exponent_coefficient(k + 1, P, sector, z_lo), sector, z_lo)
    op = quantize_linear(f, P)
    if any(bool(c) for c in op.alpha.values()):
        return False
    row = a_coefficients(P, k, N, sector)
    return all(op.gamma.get((n, sector), 0) == row[n] for n in range(N + 1))


@dataclass(frozen=True)
class ExponentData:
    """lambda-graded linear Hamiltonian: mult[d] = {q-var: coeff of q/eps}, deriv[d] = {q-var: coeff of eps d/dq}."""

    mult: dict
    deriv: dict

    def equals(self, o: "ExponentData") -> bool:
        for a, b in ((self.mult, o.mult), (self.deriv, o.deriv)):
            for d in set(a) | set(b):
                x, y = a.get(d, {}), b.get(d, {})
                if any(x.get(v, 0) != y.get(v, 0) for v in set(x) | set(y)):
                    return False
        return True


def chi_exponent_data(P: ParamField, sign: int, sector: str, dlam: int, N: int) -> ExponentData:
    """Quantized exponent of Gamma^{+-chi_sector} per lambda-degree, in q-coordinates."""
    z_lo = -max(N, dlam) - 1
    mult, deriv = {}, {}
    for d in range(-dlam, dlam + 1):
        c = exponent_coefficient(d, P, sector, z_lo)
        op = quantize_linear(_scalar_vector(c, sector, z_lo).scale(sign), P)
        m = {qvar(n, i): g for (n, i), g in op.gamma.items() if g and n <= N}
        a = {qvar(n, i): g for (n, i), g in op.alpha.items() if g}
        if m:
            mult[d] = m
        if a:
            deriv[d] = a
    return ExponentData(mult, deriv)


@dataclass(frozen=True)
class GammaY:
    """Gamma^{+-y}(lambda) in Toda time coordinates.

    mult: lambda^{k+1} -> coefficient of y_k/eps; deriv: lambda^{-k-1} -> coefficient of eps d/dy_k.
    """

    sign: int
    sector: str
    dlam: int

    def mult(self) -> dict:
        return {k + 1: {ytvar(k, self.sector): self.sign} for k in range(self.dlam)}

    def deriv(self) -> dict:
        return {-k - 1: {ytvar(k, self.sector): Fraction(-self.sign, k + 1)} for k in range(self.dlam)}


def gamma_y_exponent(sign: int, sector: str, dlam: int) -> GammaY:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    sigma(sector)
    return GammaY(sign, sector, dlam)


def gamma_y_in_q(G: GammaY, change: TriangularChange) -> ExponentData:
    """Gamma^{+-y} e^{-+eps d_{0,i}} pushed through the change into q-coordinates."""
    mult, deriv = {}, {}
    for d, forms in G.mult().items():
        acc: dict = {}
        for v, c in forms.items():
            k = parse_var(v)[1]
            for qv, a in change.y_form(k, G.sector).items():
                acc[qv] = acc.get(qv, 0) + c * a
        mult[d] = {v: c for v, c in acc.items() if c}
    for d, forms in G.deriv().items():
        acc = {}
        for v, c in forms.items():
            k = parse_var(v)[1]
            for n, b in change.B[(G.sector, k)].items():
                acc[qvar(n, G.sector)] = acc.get(qvar(n, G.sector), 0) + c * b
        deriv[d] = {v: c for v, c in acc.items() if c}
    deriv[0] = {qvar(0, G.sector): -G.sign}
    return ExponentData(mult, deriv)


def transform_identity(P: ParamField, sign: int, sector: str, dlam: int = 6) -> bool:
    """Gamma^{+-chi_i} = Gamma^{+-y_i} e^{-+eps d_{0,i}} as exponent data."""
    N = dlam
    change = TriangularChange.build(P, dlam, N)
    lhs = chi_exponent_data(P, sign, sector, dlam, N)
    rhs = gamma_y_in_q(gamma_y_exponent(sign, sector, dlam), change)
    return lhs.equals(rhs)


# -- tau sequence ----------------------------------------------------------------

@dataclass(frozen=True)
class TodaTau:
    n: int
    T: FockElement
    q_weight: Fraction  # tau_n carries Q^{q_weight}


def toda_tau_sequence(T: FockElement, n_range, shift_vars: dict | None = None) -> dict:
    """tau_n = Q^{n^2/2} e^{n eps d} T with d = d/dq_{0,0} + d/dq_{0,inf}.

    ``shift_vars`` gives d in other coordinates as {var: coefficient}; the
    shift exponential acts exactly on log T.
    """
    dirs = shift_vars if shift_vars is not None else {qvar(0, "0"): 1, qvar(0, "inf"): 1}
    out = {}
    for n in n_range:
        mapping = {v: MPoly.var(v) + eps() * (c * n) for v, c in dirs.items() if v in T.L.variables()}
        L = T.L.subs(mapping) if mapping else T.L
        out[n] = TodaTau(n, FockElement(L, T.cuts), Fraction(n * n, 2))
    return out


def toda_shift_direction(P: ParamField) -> dict:
    """d/dq_{0,0} + d/dq_{0,inf} in Toda times: (1/nu) d/dy_0 - (1/nu) d/dybar_0."""
    return {ytvar(0, "0"): P.one / P.nu, ytvar(0, "inf"): -P.one / P.nu}


# -- 2-Toda residual -----------------------------------------------------------------

def toda_half_kernel(sign: int, sector: str, levels: int, dlam: int, rescale: bool = False) -> HalfKernel:
    """Gamma^{sign y_sector} as shift + multiplication in Toda times.

    With ``rescale`` the times are Y_k = eps^{-k} y_k.
    """
    mult, shift = {}, {}
    for k in range(max(levels, dlam) + 1):
        v = ytvar(k, sector)
        r = k if rescale else 0
        if k <= levels:
            mult[v] = lam(k + 1) * eps(r - 1) * sign
        if k + 1 <= dlam:
            shift[v] = lam(-k - 1) * eps(1 - r) * Fraction(-sign, k + 1)
    return HalfKernel(mult, shift)


def _is_const_shift(m) -> bool:
    return lam_exp(m) == 0


def two_toda_hqe_residual(taus: dict, n: int, m: int, P: ParamField, y_degree: int = 2,
                          levels: int = 5, eta_degree: int = 0, rescale: bool = False,
                          taus_right: dict | None = None) -> Residual:
    """Res_{lam=inf} {lam^{n-m} (G^y x G^{-y}) tau_n x tau_{m+1}
    - lam^{m-n} (G^{-ybar} x G^{ybar}) tau_{n+1} x tau_m} dlam/lam.

    Q-weights are factored by those of the first term: the second carries
    the integer power Q^{n-m}.  ``taus_right`` (default: ``taus``) feeds
    the second tensor factor.
    """
    right = taus if taus_right is None else taus_right
    for j, fam in ((n, taus), (n + 1, taus), (m, right), (m + 1, right)):
        if j not in fam:
            raise KeyError(f"tau_{j} missing")
    # the residue reads lam^0 of prefactor * series; prefactors lam^{+-(n-m)}
    # move the needed series degree down to at worst -|n-m|
    target = -abs(n - m)
    top = levels + 1
    dlam = y_degree * top - target + 1
    grading = descendant_grading(y_degree, eta_degree, levels, target)
    t1 = taus[n].q_weight + right[m + 1].q_weight
    t2 = taus[n + 1].q_weight + right[m].q_weight
    rel = t2 - t1
    if rel.denominator != 1:
        raise ValueError("relative Q-weight is not integral")
    rel = int(rel)
    Qpow = P.Q ** rel if rel >= 0 else (P.one / P.Q) ** (-rel)
    terms = [
        BilinearTerm(lam(n - m), toda_half_kernel(1, "0", levels, dlam, rescale),
                     toda_half_kernel(-1, "0", levels, dlam, rescale),
                     taus[n].T.L, right[m + 1].T.L, ("y", n, m + 1)),
        BilinearTerm(lam(m - n) * (-Qpow), toda_half_kernel(-1, "inf", levels, dlam, rescale),
                     toda_half_kernel(1, "inf", levels, dlam, rescale),
                     taus[n + 1].T.L, right[m].T.L, ("ybar", n + 1, m)),
    ]
    exps = [expand_term(t, MPoly.const(1), grading, levels, _is_const_shift) for t in terms]
    return combine(exps, lambda s: lam_coefficient(s, 0))


def vacuum_taus(n_range, cuts=None) -> dict:
    return {n: TodaTau(n, FockElement(MPoly(), cuts) if cuts else FockElement(MPoly()), Fraction(n * n, 2))
            for n in n_range}


_ = EPS
