"""Equivariant cohomology of CP^1 and its loop space at a finite z-window.

Everything is stored in the fixed-point basis ``{phi_0, phi_inf}``, where
the cup product is diagonal and ``p`` acts as ``diag(nu0, nuinf)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from .params import ParamField
from .series import SeriesError, TruncSeries

INDICES = ("0", "inf")


@dataclass(frozen=True)
class CohClass:
    c0: Any = 0
    cinf: Any = 0

    def __add__(self, o: "CohClass"):
        return CohClass(self.c0 + o.c0, self.cinf + o.cinf)

    def __sub__(self, o: "CohClass"):
        return CohClass(self.c0 - o.c0, self.cinf - o.cinf)

    def __neg__(self):
        return CohClass(-self.c0, -self.cinf)

    def scale(self, c) -> "CohClass":
        return CohClass(self.c0 * c, self.cinf * c)

    def __mul__(self, o):
        if isinstance(o, CohClass):
            return CohClass(self.c0 * o.c0, self.cinf * o.cinf)
        return self.scale(o)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.c0) or bool(self.cinf)

    def __getitem__(self, i: str):
        return self.c0 if i == "0" else self.cinf

    def comps(self):
        return (self.c0, self.cinf)

    def map(self, fn) -> "CohClass":
        return CohClass(fn(self.c0), fn(self.cinf))


def phi(i: str) -> CohClass:
    return CohClass(1, 0) if i == "0" else CohClass(0, 1)


def dual(i: str, P: ParamField) -> CohClass:
    """phi^0 = nu phi_0 and phi^inf = -nu phi_inf."""
    return CohClass(P.nu, 0) if i == "0" else CohClass(0, -P.nu)


def from_standard(a, b, P: ParamField) -> CohClass:
    """The class a*1 + b*p."""
    return CohClass(a + b * P.nu0, a + b * P.nuinf)


def to_standard(c: CohClass, P: ParamField):
    """Inverse of :func:`from_standard`: returns (a, b)."""
    b = (c.c0 - c.cinf) / P.nu
    return c.c0 - b * P.nu0, b


def pairing(a: CohClass, b: CohClass, P: ParamField):
    return (a.c0 * b.c0 - a.cinf * b.cinf) / P.nu


def nu_index(i: str, P: ParamField):
    """nu_i with (phi_i, phi_i) = 1/nu_i."""
    return P.nu if i == "0" else -P.nu


class LoopVector:
    """f(z) = sum_k f_k z^k in H((z^-1)), known for exponents >= lo.

    ``lo = None`` means the vector is exact (a Laurent polynomial).
    """

    __slots__ = ("coeffs", "lo")

    def __init__(self, coeffs: Mapping[int, CohClass] | None = None, lo: int | None = None):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v and (lo is None or k >= lo)}
        self.lo = lo

    @classmethod
    def from_series(cls, s0: TruncSeries, sinf: TruncSeries) -> "LoopVector":
        for s in (s0, sinf):
            if s.var != "z" or not s.at_infinity:
                raise SeriesError("loop vectors are built from z-series at infinity")
        lo = 1 - min(s0.order, sinf.order)
        keys = set(s0.coeffs) | set(sinf.coeffs)
        return cls({k: CohClass(s0.coeffs.get(k, 0), sinf.coeffs.get(k, 0)) for k in keys if k >= lo}, lo)

    def component(self, i: str) -> TruncSeries:
        lo = self.lo if self.lo is not None else min(self.coeffs, default=0) - 64
        return TruncSeries({k: v[i] for k, v in self.coeffs.items()}, 1 - lo, "z", True)

    @property
    def hi(self):
        return max(self.coeffs, default=None)

    def window(self):
        return (self.lo, self.hi)

    def __getitem__(self, k: int) -> CohClass:
        if self.lo is not None and k < self.lo:
            raise SeriesError(f"z^{k} lies below the window")
        return self.coeffs.get(k, CohClass())

    def _lo(self, o: "LoopVector"):
        if self.lo is None:
            return o.lo
        if o.lo is None:
            return self.lo
        return max(self.lo, o.lo)

    def __add__(self, o: "LoopVector"):
        out = dict(self.coeffs)
        for k, v in o.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return LoopVector(out, self._lo(o))

    def __neg__(self):
        return LoopVector({k: -v for k, v in self.coeffs.items()}, self.lo)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "LoopVector":
        return LoopVector({k: v.scale(c) for k, v in self.coeffs.items()}, self.lo)

    def __bool__(self):
        return bool(self.coeffs)

    def truncate(self, lo: int) -> "LoopVector":
        return LoopVector(self.coeffs, lo if self.lo is None else max(lo, self.lo))

    def shift(self, n: int) -> "LoopVector":
        """Multiply by z^n."""
        return LoopVector({k + n: v for k, v in self.coeffs.items()},
                          None if self.lo is None else self.lo + n)

    def reflect(self) -> "LoopVector":
        """f(-z)."""
        return LoopVector({k: v.scale(-1) if k % 2 else v for k, v in self.coeffs.items()}, self.lo)

    def map(self, fn) -> "LoopVector":
        return LoopVector({k: v.map(fn) for k, v in self.coeffs.items()}, self.lo)

    def agrees_with(self, o: "LoopVector") -> bool:
        lo = self._lo(o)
        keys = set(self.coeffs) | set(o.coeffs)
        return all(not (self.coeffs.get(k, CohClass()) - o.coeffs.get(k, CohClass()))
                   for k in keys if lo is None or k >= lo)

    def __repr__(self):
        body = " + ".join(f"[{v.c0}, {v.cinf}] z^{k}" for k, v in sorted(self.coeffs.items()))
        return f"LoopVector({body or '0'}; lo={self.lo})"


def polarize(f: LoopVector) -> tuple[LoopVector, LoopVector]:
    plus = LoopVector({k: v for k, v in f.coeffs.items() if k >= 0}, None)
    minus = LoopVector({k: v for k, v in f.coeffs.items() if k < 0}, f.lo)
    return plus, minus


class Undecidable(SeriesError):
    """The truncation cannot certify the requested coefficient."""


def symplectic_form(f: LoopVector, g: LoopVector, P: ParamField):
    """Omega(f, g) = [z^-1] (f(-z), g(z))."""
    for a, b in ((f, g), (g, f)):
        if a.lo is not None and b.hi is not None and a.lo + b.hi > -1:
            raise Undecidable("window too shallow to certify the z^-1 coefficient of (f(-z), g(z))")
    acc = 0
    for k, v in f.coeffs.items():
        w = g.coeffs.get(-1 - k)
        if w is None:
            continue
        term = pairing(v, w, P)
        acc = acc - term if k % 2 else acc + term
    return acc


@dataclass(frozen=True)
class DarbouxSplit:
    """Darboux coordinates of a vector: f = sum q_{k,i} phi_i z^k + sum p_{k,i} phi^i (-z)^{-1-k}.

    ``q[(k, i)]`` are the H_+ coordinates; ``p[(k, i)]`` the H_- ones.
    """

    q: dict = field(default_factory=dict)
    p: dict = field(default_factory=dict)


def darboux(f: LoopVector, P: ParamField) -> DarbouxSplit:
    q, p = {}, {}
    for k, v in f.coeffs.items():
        for i in INDICES:
            c = v[i]
            if not c:
                continue
            if k >= 0:
                q[(k, i)] = c
            else:
                l = -1 - k
                # c phi_i z^{-1-l} = p phi^i (-z)^{-1-l}  with phi^i = nu_i phi_i
                sign = -1 if (l + 1) % 2 else 1
                p[(l, i)] = c * sign / nu_index(i, P)
    return DarbouxSplit(q, p)


def from_darboux(d: DarbouxSplit, P: ParamField) -> LoopVector:
    out: dict = {}
    for (k, i), c in d.q.items():
        out[k] = out.get(k, CohClass()) + phi(i).scale(c)
    for (l, i), c in d.p.items():
        sign = -1 if (l + 1) % 2 else 1
        e = -1 - l
        out[e] = out.get(e, CohClass()) + phi(i).scale(c * sign * nu_index(i, P))
    return LoopVector(out, None)


def mat_apply(M, c: CohClass) -> CohClass:
    (a, b), (d, e) = M
    return CohClass(a * c.c0 + b * c.cinf, d * c.c0 + e * c.cinf)


def mat_mul(A, B):
    return tuple(tuple(sum((A[i][k] * B[k][j] for k in range(2)), 0) for j in range(2))
                 for i in range(2))


def mat_add(A, B):
    return tuple(tuple(A[i][j] + B[i][j] for j in range(2)) for i in range(2))


def mat_adjoint(M, P: ParamField):
    """Adjoint for the pairing diag(1/nu, -1/nu): G^-1 M^T G."""
    (a, b), (d, e) = M
    return ((a, -d), (-b, e))


def mat_is_zero(M) -> bool:
    return not any(bool(x) for row in M for x in row)


class LoopOperator:
    """sum_m A_m z^m acting on loop vectors; A_m are 2x2 matrices in the fixed-point basis.

    Coefficients are certified for ``m >= lo`` (``lo=None``: exact).
    """

    __slots__ = ("mats", "lo")

    def __init__(self, mats: Mapping[int, Any], lo: int | None = None):
        self.mats = {m: M for m, M in mats.items() if not mat_is_zero(M) and (lo is None or m >= lo)}
        self.lo = lo

    @classmethod
    def identity(cls):
        return cls({0: ((1, 0), (0, 1))})

    def is_lower(self) -> bool:
        return all(m < 0 for m in self.mats)

    def is_upper(self) -> bool:
        return all(m > 0 for m in self.mats)

    def __call__(self, f: LoopVector) -> LoopVector:
        out: dict = {}
        for m, M in self.mats.items():
            for k, v in f.coeffs.items():
                w = mat_apply(M, v)
                out[k + m] = out[k + m] + w if k + m in out else w
        lo = None
        if f.lo is not None or self.lo is not None:
            top_f = f.hi if f.hi is not None else 0
            top_m = max(self.mats, default=0)
            cands = []
            if f.lo is not None:
                cands.append(f.lo + top_m)
            if self.lo is not None:
                cands.append(self.lo + top_f)
            lo = max(cands)
        return LoopVector(out, lo)

    def adjoint_reflected(self, P: ParamField) -> "LoopOperator":
        """M*(-z)."""
        return LoopOperator({m: mat_adjoint(M, P) if m % 2 == 0 else
                             tuple(tuple(-x for x in row) for row in mat_adjoint(M, P))
                             for m, M in self.mats.items()}, self.lo)

    def __mul__(self, o: "LoopOperator") -> "LoopOperator":
        out: dict = {}
        for a, A in self.mats.items():
            for b, B in o.mats.items():
                AB = mat_mul(A, B)
                out[a + b] = mat_add(out[a + b], AB) if a + b in out else AB
        lo = None
        if self.lo is not None or o.lo is not None:
            cands = []
            if self.lo is not None:
                cands.append(self.lo + max(o.mats, default=0))
            if o.lo is not None:
                cands.append(o.lo + max(self.mats, default=0))
            lo = max(cands)
        return LoopOperator(out, lo)

    def scale(self, c) -> "LoopOperator":
        return LoopOperator({m: tuple(tuple(x * c for x in row) for row in M)
                             for m, M in self.mats.items()}, self.lo)

    def __getitem__(self, m):
        if self.lo is not None and m < self.lo:
            raise SeriesError(f"z^{m} lies below the operator window")
        return self.mats.get(m, ((0, 0), (0, 0)))
