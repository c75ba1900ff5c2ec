"""J-function, S-matrix, mirror coordinates and phase factors at tau = t p.

Matrices act on column vectors in the fixed-point basis: ``M[k][i]`` is the
``phi_k`` component of ``M phi_i``.  Operators in ``z`` are
:class:`~cp1hqe.loop.LoopOperator` instances with ``lo`` the deepest
certified power of ``z``.

With ``s = Q e^t`` and the Q-degree cut ``d_max``, the degree-d summand of S
starts at ``z^{-(2d-1)}``, so S is certified through ``z^{-2 d_max}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .loop import (INDICES, CohClass, LoopOperator, LoopVector, mat_adjoint, mat_add, mat_apply,
                   mat_is_zero, mat_mul, nu_index, pairing, phi, symplectic_form)
from .params import ParamField
from .series import SeriesError, TruncSeries
from .ratfun import Poly, RationalFunction
from .vertex import descendant_exponent, exponent_coefficient, sigma


def eigenvalue(P: ParamField, i: str):
    """p acts on phi_i by nu_i (nu0 or nuinf)."""
    return P.nu0 if i == "0" else P.nuinf


def _other(i: str) -> str:
    return "inf" if i == "0" else "0"


def _zpoly(coeffs: dict, order: int) -> TruncSeries:
    return TruncSeries(coeffs, order, "z", True)


def _exp_over_z(c, order: int, one=1) -> TruncSeries:
    """exp(c/z) through z^{-(order-1)}."""
    out, term = {}, one
    for k in range(order):
        out[-k] = term
        term = term * c / (k + 1)
    return _zpoly(out, order)


def _degree_term(P: ParamField, i: str, d: int, order: int) -> TruncSeries:
    """s^d e^{t nu_i/z} / prod_{j=1..d} (nu_i - nu0 + j z)(nu_i - nuinf + j z)."""
    e = eigenvalue(P, i)
    den = _zpoly({0: P.one}, order + 4 * d)
    for j in range(1, d + 1):
        for other in (P.nu0, P.nuinf):
            den = den * _zpoly({0: e - other, 1: P.const(j)}, order + 4 * d)
    return (den.inverse() * _exp_over_z(e * P.t, order + 4 * d, P.one)).truncate(order) * (P.s ** d)


def certified_order(d_max: int) -> int:
    """Keys (powers of 1/z) certified when J is cut at Q-degree d_max."""
    return 2 * d_max + 1


def j_operator(P: ParamField, d_max: int, order: int | None = None) -> dict:
    """Diagonal entries j_i(z) of J at tau = t p (t0 = 0)."""
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    cert = certified_order(d_max) + 1
    order = cert if order is None else order
    if order > cert:
        raise SeriesError(f"a window of {order} keys needs d_max >= {(order - 1) // 2}")
    out = {}
    for i in INDICES:
        acc = _zpoly({}, order)
        for d in range(d_max + 1):
            acc = acc + _degree_term(P, i, d, order)
        out[i] = acc
    return out


@dataclass(frozen=True)
class SMatrix:
    P: ParamField
    d_max: int
    op: LoopOperator

    def __getitem__(self, m: int):
        """S_m, the coefficient of z^{-m}."""
        return self.op[-m]

    @property
    def depth(self) -> int:
        return -self.op.lo

    def column(self, i: str) -> LoopVector:
        return self.op(LoopVector({0: phi(i)}))


def s_matrix(P: ParamField, d_max: int) -> SMatrix:
    """S phi_i = sum_k phi^k(z d_t) (J phi_i, phi_i) phi_k.

    phi^0 = p - nuinf and phi^inf = p - nu0 as polynomials in p; on the
    degree-d summand z d_t acts by d z + nu_i since d s/dt = s.
    """
    order = certified_order(d_max)
    mats: dict = {}
    for i in INDICES:
        e, norm = eigenvalue(P, i), nu_index(i, P)
        for k in INDICES:
            shift = eigenvalue(P, _other(k))
            acc = _zpoly({}, order)
            for d in range(d_max + 1):
                factor = _zpoly({0: (e - shift) / norm, 1: P.const(d) / norm}, order + 2)
                acc = acc + (_degree_term(P, i, d, order + 1) * factor).truncate(order)
            for m, c in acc.coeffs.items():
                M = mats.setdefault(m, [[0, 0], [0, 0]])
                M[INDICES.index(k)][INDICES.index(i)] = c
    frozen = {m: tuple(tuple(r) for r in M) for m, M in mats.items()}
    return SMatrix(P, d_max, LoopOperator(frozen, 1 - order))


def s_matrix_by_dt(P: ParamField, d_max: int) -> SMatrix:
    """The same matrix with z d_t taken as a true derivative (symbolic fields only)."""
    order = certified_order(d_max)
    J = j_operator(P, d_max, order + 1)
    mats: dict = {}
    for i in INDICES:
        norm = nu_index(i, P)
        ji = J[i] * (P.one / norm)
        zdt = TruncSeries({m + 1: P.dt(c) for m, c in ji.coeffs.items()}, order, "z", True)
        for k in INDICES:
            acc = zdt - ji.truncate(order) * eigenvalue(P, _other(k))
            for m, c in acc.coeffs.items():
                M = mats.setdefault(m, [[0, 0], [0, 0]])
                M[INDICES.index(k)][INDICES.index(i)] = c
    frozen = {m: tuple(tuple(r) for r in M) for m, M in mats.items()}
    return SMatrix(P, d_max, LoopOperator(frozen, 1 - order))


def phi0_column(P: ParamField, d_max: int) -> LoopVector:
    """S phi_0 from the closed expansion in Q-degree (independent of J)."""
    order = certified_order(d_max)
    nu = P.nu
    lead = _exp_over_z(P.nu0 * P.t, order + 2 * d_max + 2, P.one)
    main = _zpoly({0: P.one}, order + 2 * d_max + 2)
    side = _zpoly({}, order + 2 * d_max + 2)
    for d in range(1, d_max + 1):
        den = _zpoly({d: P.const(factorial(d))}, order + 4 * d) * nu
        for j in range(1, d):
            den = den * _zpoly({0: nu, 1: P.const(j)}, order + 4 * d)
        main = main + den.inverse() * P.s ** d
        den = _zpoly({d - 1: P.const(factorial(d - 1))}, order + 4 * d) * nu
        for j in range(1, d + 1):
            den = den * _zpoly({0: nu, 1: P.const(j)}, order + 4 * d)
        side = side + den.inverse() * P.s ** d
    main = (lead * main).truncate(order)
    side = (lead * side).truncate(order)
    keys = set(main.coeffs) | set(side.coeffs)
    return LoopVector({m: CohClass(main.coeffs.get(m, 0), side.coeffs.get(m, 0)) for m in keys}, 1 - order)


# -- unitarity and W -------------------------------------------------------------------

def _identity(P):
    return ((P.one, P.zero), (P.zero, P.one))


def unitarity_defect(S: SMatrix) -> dict:
    """Nonzero coefficients of S*(-z) S(z) - 1 on the certified window."""
    prod = S.op.adjoint_reflected(S.P) * S.op
    out = {}
    for m in range(prod.lo, 1):
        M = prod[m]
        if m == 0:
            M = mat_add(M, tuple(tuple(-x for x in r) for r in _identity(S.P)))
        if not mat_is_zero(M):
            out[m] = M
    return out


def w_matrices(S: SMatrix, K: int) -> dict:
    """W_{kl} for k + l <= K from sum W_{kl} z^-k w^-l = (S*(w) S(z) - 1)/(z^-1 + w^-1).

    Multiplying out gives W_{k-1,l} + W_{k,l-1} = S_l^* S_k; the recursion
    below uses it at (k+1, l).
    """
    if K + 1 > S.depth:
        raise SeriesError(f"W_(k,l) with k + l = {K} needs S through z^-{K + 1}")
    P = S.P
    W: dict = {}
    adj = {l: mat_adjoint(S[l], P) for l in range(K + 2)}
    for total in range(K + 1):
        for l in range(total + 1):
            k = total - l
            M = mat_mul(adj[l], S[k + 1])
            if l > 0:
                M = mat_add(M, tuple(tuple(-x for x in r) for r in W[(k + 1, l - 1)]))
            W[(k, l)] = M
    return W


def w_telescoping_defect(S: SMatrix, W: dict, K: int) -> list:
    """(k, l) with W_{k-1,l} + W_{k,l-1} != S_l^* S_k; the k = 0 row is not built in."""
    P = S.P
    zero = ((0, 0), (0, 0))
    bad = []
    for total in range(1, K + 1):
        for l in range(total + 1):
            k = total - l
            lhs = mat_add(W.get((k - 1, l), zero), W.get((k, l - 1), zero))
            rhs = mat_mul(mat_adjoint(S[l], P), S[k])
            if not mat_is_zero(mat_add(lhs, tuple(tuple(-x for x in r) for r in rhs))):
                bad.append((k, l))
    return bad


def s1_pairing(P: ParamField, i: str = "0"):
    """(S_1 phi_i, phi_i)."""
    S = s_matrix(P, 1)
    return pairing(mat_apply(S[1], phi(i)), phi(i), P)


def constant_closed_form(P: ParamField, i: str = "0"):
    """C_0 = t nu0/nu + s/nu^2 and C_inf = -t nuinf/nu + s/nu^2."""
    nu = P.nu
    return (P.t * P.nu0 / nu if i == "0" else -P.t * P.nuinf / nu) + P.s / (nu * nu)


def cancellation_value(P: ParamField):
    """C_0 - C_inf - t (2 nu0/nu - 1), from the S-matrix constants."""
    two = P.const(2)
    return s1_pairing(P, "0") - s1_pairing(P, "inf") - P.t * (two * P.nu0 / P.nu - P.one)


# -- commutation exponents ---------------------------------------------------------------

def commutation_exponent(P: ParamField, m: int, n: int, sector: str, dlam: int = 3) -> dict:
    """lam-coefficients of -Omega(a, f^{+chi}) - Omega(b, f^{-chi}).

    a = (n+1) phi_0 + n phi_inf, b = m phi_0 + (m+1) phi_inf; for the
    sector inf the signs of the two exponents are swapped.
    """
    sg = 1 if sector == "0" else -1
    fa = descendant_exponent(P, sg, sector, dlam, -dlam - 2)
    fb = descendant_exponent(P, -sg, sector, dlam, -dlam - 2)
    a = LoopVector({0: CohClass(P.const(n + 1), P.const(n))})
    b = LoopVector({0: CohClass(P.const(m), P.const(m + 1))})
    out = {}
    for d in range(-dlam, dlam + 1):
        v = -symplectic_form(a, fa[d], P) - symplectic_form(b, fb[d], P)
        if v:
            out[d] = v
    return out


def commutation_closed_form(P: ParamField, m: int, n: int, sector: str) -> dict:
    c = m - n - 1 if sector == "0" else m - n + 1
    return {1: P.const(c) / P.nu} if c else {}



# -- mirror coordinates ------------------------------------------------------------------

def _lam_series(coeffs: dict, order: int, var: str = "lam") -> TruncSeries:
    return TruncSeries(coeffs, order, var, True)


def mirror_coordinate(P: ParamField, sector: str = "0", order: int = 8) -> TruncSeries:
    """x(lam) = lam + g(lam) solving lam - sg nu log lam = x - sg nu log x + s/x + t nu_sector.

    g = -t nu_sector + sg nu log(1 + g/lam) - s/(lam + g) is iterated at lam = infinity;
    each pass fixes one more power of 1/lam.
    """
    sg = sigma(sector)
    ex = TruncSeries({1: P.one}, order + 2, "lam", True)
    inv = _lam_series({-1: P.one}, order + 2)
    g = _lam_series({0: -P.t * eigenvalue(P, sector)}, order)
    for _ in range(order + 2):
        u = g * inv + P.one
        new = (u.log() * (sg * P.nu) - u.inverse() * inv * P.s).truncate(order) - P.t * eigenvalue(P, sector)
        if new.agrees_with(g) and new.order == g.order:
            break
        g = new
    return (ex + g).truncate(order)


def antiderivative_difference(x: TruncSeries, P: ParamField, sector: str = "0") -> TruncSeries:
    """int_x^lam phi = Phi(lam) - Phi(x(lam)) with Phi(w) = w - sg nu log w + s/w."""
    sg = sigma(sector)
    order = x.order
    ex = _lam_series({1: P.one}, order + 2)
    inv = _lam_series({-1: P.one}, order + 2)
    diff = ex - x + (x * inv).log() * (sg * P.nu) + inv * P.s - x.inverse() * P.s
    return diff.truncate(order)


def mirror_residual(x: TruncSeries, P: ParamField, sector: str = "0") -> TruncSeries:
    """int_x^lam phi - (s/lam + t nu_sector); zero along the change."""
    inv = _lam_series({-1: P.one}, x.order)
    return antiderivative_difference(x, P, sector) - inv * P.s - P.t * eigenvalue(P, sector)


def inverse_mirror(x: TruncSeries, order: int | None = None) -> TruncSeries:
    """lam(x) as a series in x at infinity."""
    return x.revert(order, var="x")


# -- phase factors -------------------------------------------------------------------------

def descendant_modes(P: ParamField, sector: str, K: int, order: int) -> dict:
    """q_k = [z^k] f^chi as lam-series at infinity, k = 0..K, certified through lam^-(order-1)."""
    q = {}
    for k in range(K + 1):
        coeffs = {}
        for d in range(-order, 0 if k else 1):
            c = exponent_coefficient(d, P, sector, -order - 2).coeffs.get(k)
            if c:
                coeffs[d] = c
        series = _lam_series(coeffs, order)
        zero = _lam_series({}, order)
        q[k] = CohClass(series, zero) if sector == "0" else CohClass(zero, series)
    return q


def w_series(S: SMatrix, sector: str, K: int) -> TruncSeries:
    """W_tau(f_+, f_+) = sum_{k+l<=K} (W_kl q_l, q_k) for f = f^chi, as a lam-series.

    q_k = O(lam^{-k-1}) for k >= 1, so the omitted terms start at lam^-(K+2).
    """
    P = S.P
    W = w_matrices(S, K)
    q = descendant_modes(P, sector, K, K + 2)
    out = _lam_series({}, K + 2)
    for (k, l), M in W.items():
        if not mat_is_zero(M):
            out = out + pairing(mat_apply(M, q[l]), q[k], P)
    return out.truncate(K + 2)


def _critical_series(P: ParamField, sector: str, x: TruncSeries) -> TruncSeries:
    """(x^2 - sg nu x - s)/x^2 for a series x."""
    inv = x.inverse()
    return inv * inv * (x * x - x * (sigma(sector) * P.nu) - P.s)


def w_closed_form(P: ParamField, sector: str, order: int) -> TruncSeries:
    """C + 2 sg s/(nu x) + log(lam (lam - sg nu)/(x^2 - sg nu x - s)) with x = x(lam)."""
    sg = sigma(sector)
    x = mirror_coordinate(P, sector, order + 2)
    ex = _lam_series({1: P.one}, order + 3)
    xinv = x.inverse()
    ratio = (ex * xinv) * ((ex - sg * P.nu) * xinv) * _critical_series(P, sector, x).inverse()
    c = constant_closed_form(P, sector)
    return (ratio.log() + xinv * (2 * sg * P.s / P.nu)).truncate(order) + c


def phase_derivative_defect(S: SMatrix, sector: str, K: int) -> TruncSeries:
    """dW/dlam - [-(I(tau,x), I(tau,x)) + (I(lam), I(lam))] phi(x) dx/dlam at x = x(lam)."""
    from .vertex import ancestor_mode_seed, mode_expand_at_infinity
    P = S.P
    order = K + 3
    dW = w_series(S, sector, K).derivative()
    x = mirror_coordinate(P, sector, order + 2)
    Ix = mode_expand_at_infinity(ancestor_mode_seed(P, sector), order + 1).map(lambda f: f.compose(x))
    I_lam = descendant_modes(P, sector, 0, order + 1)[0]
    rhs = (pairing(I_lam, I_lam, P) - pairing(Ix, Ix, P)) * _critical_series(P, sector, x) * x.derivative()
    return (dW - rhs).truncate(dW.order)


@dataclass(frozen=True)
class LogExpression:
    """rational + sum c_j log p_j, differentiated exactly."""

    rational: object
    logs: tuple = ()

    def derivative(self):
        out = self.rational.derivative()
        for c, p in self.logs:
            out = out + RationalFunction(p.derivative(), p) * c
        return out


def integral_one(P: ParamField, sector: str = "0") -> tuple:
    """(primitive, integrand) for int (I^(0), I^(0)) phi dx on the ancestor side."""
    from .vertex import ancestor_mode_seed, critical_poly, ladder_factor
    sg = sigma(sector)
    nu = sg * P.nu
    xx = RationalFunction.x()
    rat = (xx - RationalFunction(Poly((P.s,)), Poly((0, 1)))) * (P.one / nu)
    prim = LogExpression(rat, ((-P.one, Poly((0, P.one))), (P.one, critical_poly(P, sector))))
    I0 = ancestor_mode_seed(P, sector).value
    integrand = pairing(I0, I0, P) * ladder_factor(P, sector)
    return prim, integrand


def integral_two(P: ParamField, sector: str = "0") -> tuple:
    """(primitive, integrand) for int (I^(0)(lam), I^(0)(lam)) (1 - sg nu/lam) dlam."""
    sg = sigma(sector)
    nu = sg * P.nu
    lam = RationalFunction.x()
    shifted = Poly((-nu, P.one))
    prim = LogExpression(lam * (P.one / nu), ((P.one, shifted),))
    I0 = -(lam / RationalFunction(shifted))
    phi_lam = RationalFunction(shifted, Poly((0, P.one)))
    integrand = I0 * I0 * phi_lam * (P.one / nu)
    return prim, integrand


def integral_holds(pair: tuple) -> bool:
    prim, integrand = pair
    return (prim.derivative() - integrand).num.deg < 0


# -- three pipelines for S f^chi -------------------------------------------------------------
#
# A lam-graded family maps a lam-degree e to a LoopVector in z.

def _family_phi(sector: str, main, side) -> CohClass:
    return CohClass(main, side) if sector == "0" else CohClass(side, main)


def direct_family(S: SMatrix, sector: str, dlam: int) -> dict:
    """Pipeline (a): [lam^e] S f^chi = S(z) c_e(z) phi_sector."""
    P = S.P
    f = descendant_exponent(P, 1, sector, dlam, -S.depth - dlam - 2)
    return {e: S.op(f[e]) for e in range(-dlam, dlam + 1)}


class _Box:
    """lam-degrees [lo, hi] and z-keys < order kept while summing D^n v."""

    def __init__(self, lo: int, hi: int, order: int):
        self.lo, self.hi, self.order = lo, hi, order

    def clip(self, F: dict) -> dict:
        out = {}
        for e, (a, b) in F.items():
            if self.lo <= e <= self.hi:
                a, b = a.truncate(self.order), b.truncate(self.order)
                if a or b:
                    out[e] = (a, b)
        return out


def _fam_add(F: dict, e: int, a: TruncSeries, b: TruncSeries):
    if e in F:
        F[e] = (F[e][0] + a, F[e][1] + b)
    else:
        F[e] = (a, b)


class _SeriesOperator:
    """D = -z d/dlam + sg nu/lam + s/lam^2 on lam-graded pairs of z-series."""

    def __init__(self, P: ParamField, sector: str, order: int):
        self.P, self.nu, self.order = P, sigma(sector) * P.nu, order
        self._inv: dict = {}

    def d0(self, e: int, order: int) -> TruncSeries:
        """D_0 lam^e = (sg nu - e z) lam^(e-1)."""
        return _zpoly({0: self.nu, 1: self.P.const(-e)}, order)

    def d0_inverse(self, e: int) -> TruncSeries:
        """D_0^-1 lam^e = lam^(e+1)/(sg nu - (e+1) z), expanded at z = infinity."""
        if e not in self._inv:
            self._inv[e] = self.d0(e + 1, self.order + 2).inverse().truncate(self.order)
        return self._inv[e]

    def forward(self, F: dict, order: int) -> dict:
        out: dict = {}
        for e, (a, b) in F.items():
            m = self.d0(e, order + 2)
            _fam_add(out, e - 1, a * m, b * m)
            _fam_add(out, e - 2, a * self.P.s, b * self.P.s)
        return out

    def _d0_inverse_all(self, F: dict) -> dict:
        out: dict = {}
        for e, (a, b) in F.items():
            m = self.d0_inverse(e)
            _fam_add(out, e + 1, a * m, b * m)
        return out

    def backward(self, F: dict, box: _Box) -> dict:
        """D^-1 = sum_j (-D_0^-1 s lam^-2)^j D_0^-1."""
        term = box.clip(self._d0_inverse_all(F))
        acc = dict(term)
        while term:
            shifted = {e - 2: (a * (-self.P.s), b * (-self.P.s)) for e, (a, b) in term.items()}
            term = box.clip(self._d0_inverse_all(shifted))
            for e, (a, b) in term.items():
                _fam_add(acc, e, a, b)
        return box.clip(acc)


def _series_sum(P: ParamField, sector: str, dlam: int, order: int) -> tuple:
    """sum_n D^n (phi + s lam^-2 phibar) inside the box; returns (family, box)."""
    margin = order + 3
    box = _Box(-dlam - margin, dlam + order + margin, order)
    op = _SeriesOperator(P, sector, order)
    zero = _zpoly({}, order + dlam + 4)
    one = _zpoly({0: P.one}, order + dlam + 4)
    sv = _zpoly({0: P.s}, order + dlam + 4)
    v = {0: (one, zero) if sector == "0" else (zero, one)}
    _fam_add(v, -2, *((zero, sv) if sector == "0" else (sv, zero)))
    total: dict = {}
    cur, fwd_order = v, order + dlam + 4
    while cur and max(cur) >= -dlam - order:
        for e, (a, b) in cur.items():
            _fam_add(total, e, a.truncate(order), b.truncate(order))
        cur = op.forward(cur, fwd_order)
        fwd_order -= 1
    cur = box.clip(v)
    while True:
        cur = op.backward(cur, box)
        if not cur:
            break
        for e, (a, b) in cur.items():
            _fam_add(total, e, a, b)
    return box.clip(total), box


def _times_exp_over_z(P: ParamField, F: dict, psi: TruncSeries, dlam: int, order: int) -> dict:
    """F * exp(psi(lam)/z) on lam-degrees [-dlam, dlam]; psi has lam-degrees <= 0."""
    powers = [_lam_series({0: P.one}, psi.order)]
    for m in range(1, order):
        powers.append(powers[-1] * psi * (P.one / m))
    out: dict = {}
    for e, (a, b) in F.items():
        for m, pw in enumerate(powers):
            for j, c in pw.coeffs.items():
                if -dlam <= e + j <= dlam:
                    w = _zpoly({-m: c}, order)
                    _fam_add(out, e + j, a * w, b * w)
    if F and psi.order <= max(F) + dlam:
        raise SeriesError(f"psi needs {max(F) + dlam + 1} certified keys, has {psi.order}")
    return {e: LoopVector.from_series(*out.get(e, (_zpoly({}, order), _zpoly({}, order))))
            for e in range(-dlam, dlam + 1)}


def series_family(P: ParamField, sector: str, dlam: int, order: int) -> dict:
    """Pipeline (b): -e^{(s/lam + t nu_sector)/z} sum_n D^n (phi + s lam^-2 phibar).

    Negative powers use the Neumann inverse of D; every D_0^-1 step off
    lam^0 costs one power of 1/z, which bounds the excursions in lam kept
    by the box.  Certified for z-keys < ``order``.
    """
    total, box = _series_sum(P, sector, dlam, order)
    total = {e: (-a, -b) for e, (a, b) in total.items()}
    psi = _lam_series({0: P.t * eigenvalue(P, sector), -1: P.s}, box.hi + dlam + 2)
    return _times_exp_over_z(P, total, psi, dlam, order)


def transformation_law_mismatches(P: ParamField, sector: str = "0", z_order: int = 5,
                                  dlam: int = 5) -> list:
    """sum I^(n)(x)(-z)^n = (sum I^(n)(lam)(-z)^n) exp((1/z) int_x^lam phi), for |n| <= z_order.

    The lam-side modes are -sum_n D^n v; the integral is taken along the
    mirror coordinate at series level.
    """
    order = z_order + 1
    total, box = _series_sum(P, sector, dlam, order)
    total = {e: (-a, -b) for e, (a, b) in total.items()}
    x = mirror_coordinate(P, sector, box.hi + dlam + 2)
    rhs = _times_exp_over_z(P, total, antiderivative_difference(x, P, sector), dlam, order)
    lhs = ladder_family(P, sector, dlam, -z_order, z_order)
    return ladder_mismatches(rhs, lhs)


def ladder_family(P: ParamField, sector: str, dlam: int, k_lo: int, k_hi: int) -> dict:
    """Pipeline (c): sum_k I^(k)(tau, x)(-z)^k with x = x(lam), read off at lam^e.

    Returns e -> {k: CohClass} for k in [k_lo, k_hi].
    """
    from .vertex import ancestor_mode_seed, mode_expand_at_infinity, mode_ladder
    modes = mode_ladder(ancestor_mode_seed(P, sector), P, min(k_lo, 0), max(k_hi, 0))
    x = mirror_coordinate(P, sector, dlam + 2 * max(-k_lo, 0) + 4)
    out: dict = {e: {} for e in range(-dlam, dlam + 1)}
    for k in range(k_lo, k_hi + 1):
        expanded = mode_expand_at_infinity(modes[k], dlam + 1).map(lambda f: f.compose(x))
        sign = 1 if k % 2 == 0 else -1
        for e in range(-dlam, dlam + 1):
            out[e][k] = CohClass(expanded.c0[e] * sign, expanded.cinf[e] * sign)
    return out


def family_mismatches(a: dict, b: dict, z_range: tuple | None = None) -> list:
    """(e, k) on the common window where two LoopVector families differ."""
    bad = []
    for e in sorted(set(a) & set(b)):
        fa, fb = a[e], b[e]
        lo = max(x for x in (fa.lo, fb.lo) if x is not None)
        hi = max(fa.hi if fa.hi is not None else lo, fb.hi if fb.hi is not None else lo)
        if z_range is not None:
            lo, hi = max(lo, z_range[0]), min(hi, z_range[1])
        for k in range(lo, hi + 1):
            if fa[k] - fb[k]:
                bad.append((e, k))
    return bad


def ladder_mismatches(a: dict, ladder: dict) -> list:
    bad = []
    for e in sorted(set(a) & set(ladder)):
        fa = a[e]
        for k, v in ladder[e].items():
            if fa.lo is not None and k < fa.lo:
                continue
            if fa[k] - v:
                bad.append((e, k))
    return bad


def eigenrelation_mismatches(P: ParamField, sector: str = "0", dlam: int = 5) -> list:
    """lam-degrees e where [lam^(e-1)] (-z d/dlam + sg nu/lam) f^chi != [lam^(e-1)] f^chi."""
    f = descendant_exponent(P, 1, sector, dlam + 1, -2 * dlam - 4)
    nu = sigma(sector) * P.nu
    bad = []
    for e in range(-dlam + 1, dlam + 1):
        lhs = LoopVector({k + 1: v.scale(-e) for k, v in f[e].coeffs.items()}, f[e].lo + 1) + f[e].scale(nu)
        if not lhs.agrees_with(f[e - 1]):
            bad.append(e)
    return bad


# -- exponent bookkeeping of the changes of variables ------------------------------------------
#
# An exponent is a linear combination of atoms: "1", "w" (the integration
# variable), "inv_w", "log_w", "log_Q", "lam", "log_lam", "log_lam_shift"
# (log(lam - sg nu)) and "log_D" (log of the critical polynomial in w).
# A residue is sign * Res_{w = point} exp(exponent) dw.

@dataclass(frozen=True)
class LogLinear:
    terms: tuple = ()

    @classmethod
    def of(cls, **kw) -> "LogLinear":
        return cls(tuple(sorted((k, v) for k, v in kw.items() if v)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, o: "LogLinear") -> "LogLinear":
        d = self.as_dict()
        for k, v in o.terms:
            d[k] = d.get(k, 0) + v
        return LogLinear.of(**d)

    def __neg__(self):
        return LogLinear(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "LogLinear":
        return LogLinear.of(**{k: v * c for k, v in self.terms})

    def substitute(self, atom: str, value: "LogLinear") -> "LogLinear":
        d = self.as_dict()
        c = d.pop(atom, 0)
        out = LogLinear.of(**d)
        return out + value.scale(c) if c else out

    def __bool__(self):
        return any(bool(v) for _, v in self.terms)


@dataclass(frozen=True)
class ResidueForm:
    sign: int
    point: str       # "inf" or "0"
    variable: str    # "lam", "x" or "xbar"
    exponent: LogLinear

    def differs_from(self, o: "ResidueForm") -> LogLinear | None:
        """None if the two forms coincide, else the exponent difference."""
        diff = self.exponent - o.exponent
        if self.sign != o.sign or self.point != o.point or self.variable != o.variable:
            return diff if diff else LogLinear.of(**{"1": 1})
        return diff if diff else None


def lambda_residue(P: ParamField, sector: str, m: int, C) -> ResidueForm:
    """lam^-m e^{W_0 + (m-1) lam/nu} dlam/lam, or -(Q/lam)^-m e^{W_inf + (m+1) lam/nu} dlam/lam."""
    sg = sigma(sector)
    w = LogLinear.of(**{"1": C, "inv_w": 2 * sg * P.s / P.nu, "log_lam": P.one,
                        "log_lam_shift": P.one, "log_D": -P.one})
    if sector == "0":
        rest = LogLinear.of(log_lam=P.const(-m - 1), lam=P.const(m - 1) / P.nu)
        return ResidueForm(1, "inf", "lam", w + rest)
    rest = LogLinear.of(log_Q=P.const(-m), log_lam=P.const(m - 1), lam=P.const(m + 1) / P.nu)
    return ResidueForm(-1, "inf", "lam", w + rest)


def change_lambda(form: ResidueForm, P: ParamField, sector: str) -> ResidueForm:
    """lam -> w along lam - sg nu log lam = w - sg nu log w + s/w + t nu_sector."""
    sg = sigma(sector)
    nu = sg * P.nu
    lam = LogLinear.of(**{"w": P.one, "log_w": -nu, "inv_w": P.s, "1": P.t * eigenvalue(P, sector),
                          "log_lam": nu})
    # dlam = (w^2 - sg nu w - s)/w^2 * lam/(lam - sg nu) dw
    jac = LogLinear.of(log_D=P.one, log_w=P.const(-2), log_lam=P.one, log_lam_shift=-P.one)
    expo = form.exponent.substitute("lam", lam) + jac
    return ResidueForm(form.sign, form.point, "x" if sector == "0" else "xbar", expo)


def change_x_form(P: ParamField, m: int, C0) -> ResidueForm:
    """exp(2s/(x nu) + (m-1)/nu (x + s/x - nu log x + t nu0) + C_0) dx/x^2 at x = infinity."""
    k = P.const(m - 1) / P.nu
    e = LogLinear.of(**{"1": C0 + k * P.t * P.nu0, "w": k, "inv_w": 2 * P.s / P.nu + k * P.s,
                        "log_w": -k * P.nu - 2 * P.one})
    return ResidueForm(1, "inf", "x", e)


def change_xbar_form(P: ParamField, m: int, Cinf) -> ResidueForm:
    """-Q^-m exp(-2s/(xbar nu) + (m+1)/nu (xbar + s/xbar + nu log xbar + t nuinf) + C_inf) dxbar/xbar^2."""
    k = P.const(m + 1) / P.nu
    e = LogLinear.of(**{"1": Cinf + k * P.t * P.nuinf, "w": k, "inv_w": -2 * P.s / P.nu + k * P.s,
                        "log_w": k * P.nu - 2 * P.one, "log_Q": P.const(-m)})
    return ResidueForm(-1, "inf", "xbar", e)


def reciprocal_change(form: ResidueForm, P: ParamField) -> ResidueForm:
    """xbar = s/x: log xbar = log Q + t - log x, dxbar = -(s/x^2) dx, and infinity goes to 0."""
    if form.variable != "xbar":
        raise ValueError("the reciprocal change applies to xbar residues")
    d = form.exponent.as_dict()
    w, inv, logw = d.pop("w", 0), d.pop("inv_w", 0), d.pop("log_w", 0)
    out = LogLinear.of(**d)
    out = out + LogLinear.of(inv_w=w * P.s, w=inv / P.s)
    out = out + LogLinear.of(**{"log_Q": logw, "1": logw * P.t, "log_w": -logw})
    out = out + LogLinear.of(**{"log_Q": P.one, "1": P.t, "log_w": P.const(-2)})
    return ResidueForm(-form.sign, "0", "x", out)


def change_xbar1_form(P: ParamField, m: int, Cinf) -> ResidueForm:
    """-Res_{x=0} exp((m-1)/nu (s/x + x - nu log x + t nu0) + 2s/(x nu) + 2 t nu0/nu + C_inf - t) dx/x^2.

    The sign already absorbs the orientation of x -> 0; it is recorded
    against the point 0 with sign +1 after the two flips.
    """
    k = P.const(m - 1) / P.nu
    e = LogLinear.of(**{"1": k * P.t * P.nu0 + 2 * P.t * P.nu0 / P.nu + Cinf - P.t, "w": k,
                        "inv_w": 2 * P.s / P.nu + k * P.s, "log_w": -k * P.nu - 2 * P.one})
    return ResidueForm(1, "0", "x", e)


def ancestor_prefactor_defects(P: ParamField, m: int, form: ResidueForm, depth: int = 3) -> list:
    """(k, j) where exp(a x + b/x) x^c, read off the form, disagrees with the ancestor prefactor.

    The form's constant is the common factor left out of the ancestor kernel.
    """
    from .ancestor import prefactor_parts
    d = form.exponent.as_dict()
    if set(d) - {"1", "w", "inv_w", "log_w"}:
        return [("atoms", tuple(sorted(d)))]
    a, b, c = d.get("w", 0), d.get("inv_w", 0), d.get("log_w", 0)
    if c - P.const(-(m - 1) - 2):
        return [("log_w", c)]
    bad = []
    for k in range(depth + 1):
        for j in range(depth + 1):
            const, e = prefactor_parts(P, m, k, j)
            mine = b ** k * P.const(Fraction(1, factorial(k))) * a ** j * P.const(Fraction(1, factorial(j)))
            if const - mine or e != -(m - 1) - k + j - 2:
                bad.append((k, j))
    return bad


@dataclass
class EquivalenceSteps:
    """Outcome of each step reducing the descendant HQE to the ancestor HQE."""

    steps: dict
    details: dict

    @property
    def holds(self) -> bool:
        return all(self.steps.values())


def descendant_ancestor_equivalence(P: ParamField, ms=(-1, 0, 1, 2), ns=(-1, 0, 1, 2),
                                    d_max: int = 2, dlam: int = 5, K: int = 4) -> EquivalenceSteps:
    """(i) S f^chi pipelines and the phases W; (ii) commutation exponents;
    (iii) lam -> x and lam -> xbar; (iv) xbar = s/x and the constant cancellation."""
    steps, details = {}, {}
    S = s_matrix(P, d_max)
    bad = {}
    for sector in INDICES:
        A = direct_family(S, sector, dlam)
        bad[f"series_{sector}"] = family_mismatches(A, series_family(P, sector, dlam, S.depth + dlam + 1))
        bad[f"ladder_{sector}"] = ladder_mismatches(A, ladder_family(P, sector, dlam, -S.depth - dlam, dlam - 1))
    SW = s_matrix(P, (K + 2) // 2)
    for sector in INDICES:
        w = w_series(SW, sector, K)
        bad[f"phase_{sector}"] = w.difference_witness(w_closed_form(P, sector, w.order))
    steps["i"] = not any(bad.values())
    details["i"] = {k: v for k, v in bad.items() if v}
    comm = [(m, n, sector) for m in ms for n in ns for sector in INDICES
            if commutation_exponent(P, m, n, sector) != commutation_closed_form(P, m, n, sector)]
    steps["ii"] = not comm
    details["ii"] = comm
    C0, Ci = s1_pairing(P, "0"), s1_pairing(P, "inf")
    wrong3, wrong4 = [], []
    for m in ms:
        x_form = change_lambda(lambda_residue(P, "0", m, C0), P, "0")
        xb_form = change_lambda(lambda_residue(P, "inf", m, Ci), P, "inf")
        if x_form.differs_from(change_x_form(P, m, C0)) is not None:
            wrong3.append((m, "x"))
        if xb_form.differs_from(change_xbar_form(P, m, Ci)) is not None:
            wrong3.append((m, "xbar"))
        flipped = reciprocal_change(xb_form, P)
        if flipped.differs_from(change_xbar1_form(P, m, Ci)) is not None:
            wrong4.append((m, "xbar1"))
        if x_form.exponent - flipped.exponent:
            wrong4.append((m, "cancellation"))
        d = x_form.exponent.as_dict()
        const = d.pop("1", 0)
        common = P.const(m - 1) * P.t * P.nu0 / P.nu + C0
        if const - common or ancestor_prefactor_defects(P, m, ResidueForm(1, "inf", "x", LogLinear.of(**d))):
            wrong4.append((m, "prefactor"))
    steps["iii"] = not wrong3
    details["iii"] = wrong3
    if cancellation_value(P):
        wrong4.append(("constants", str(cancellation_value(P))))
    steps["iv"] = not wrong4
    details["iv"] = wrong4
    return EquivalenceSteps(steps, details)
