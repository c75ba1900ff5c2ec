"""Truncated Fock space and quantized Hamiltonians.

A tau datum is an asymptotic function ``exp(sum_g eps^(2g-2) F_g)``; it is
stored at the level of its logarithm ``L = sum_g eps^(2g-2) F_g``, an
:class:`MPoly` in the Darboux variables ``q_k_i`` and the grading variable
``eps``.  Vertex operators act on ``L`` by a shift plus a linear term,
which is exact.  Second-order operators need the general shape
``P * exp(L)``, represented by :class:`FockVector`.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from .loop import (INDICES, CohClass, DarbouxSplit, LoopOperator, LoopVector, darboux, mat_apply, pairing,
                   dual, phi, polarize, symplectic_form)
from .mpoly import MPoly, exp_filtered
from .params import ParamField, coeff_from_str, coeff_to_str

EPS = "eps"
SCHEMA = "cp1hqe.fock/1"
_VAR = re.compile(r"^([a-z]+)_(\d+)_(0|inf)$")


def qvar(k: int, i: str) -> str:
    return f"q_{k}_{i}"


def tvar(k: int, i: str) -> str:
    return f"t_{k}_{i}"


def parse_var(v: str):
    """``q_3_inf`` -> ('q', 3, 'inf'); None for grading variables."""
    m = _VAR.match(v)
    if not m:
        return None
    return m.group(1), int(m.group(2)), m.group(3)


def level(v: str) -> int:
    p = parse_var(v)
    return -1 if p is None else p[1]


def eps(n: int = 1) -> MPoly:
    return MPoly.var(EPS, n)


def is_darboux(v: str) -> bool:
    p = parse_var(v)
    return p is not None and p[0] == "q"


# -- tau data ---------------------------------------------------------------

@dataclass(frozen=True)
class Cuts:
    genus: int = 1
    q_degree: int = 3
    level: int = 3
    q_order: int | None = None

    def as_dict(self):
        return {"genus": self.genus, "q_degree": self.q_degree, "level": self.level,
                "q_order": self.q_order}


@dataclass(frozen=True)
class FockElement:
    """exp(L) with L = sum_g eps^(2g-2) F_g; ``cuts`` are bookkeeping only.

    The stored ``L`` is treated as exact data; operators never invent
    terms outside the variables it mentions except through their own
    explicit multiplication parts.
    """

    L: MPoly = field(default_factory=MPoly)
    cuts: Cuts = field(default_factory=Cuts)

    @classmethod
    def from_genus(cls, Fg: dict[int, MPoly], cuts: Cuts | None = None) -> "FockElement":
        L = MPoly()
        for g, F in Fg.items():
            L = L + F * eps(2 * g - 2)
        return cls(L, cuts or Cuts(genus=max(Fg, default=0)))

    def genus_parts(self) -> dict[int, MPoly]:
        out = {}
        for e, F in self.L.by_power(EPS).items():
            if e % 2:
                raise ValueError("odd eps power is not a genus expansion")
            out[(e + 2) // 2] = F
        return out

    def equals(self, o: "FockElement") -> bool:
        return self.L.equals(o.L)

    def to_json(self) -> str:
        terms = []
        for m, c in sorted(self.L.terms.items()):
            terms.append({"mono": {v: e for v, e in m}, "coeff": coeff_to_str(c)})
        return json.dumps({"schema": SCHEMA, "cuts": self.cuts.as_dict(), "log_terms": terms},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str, P: ParamField) -> "FockElement":
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unknown schema {d.get('schema')!r}")
        L = MPoly({tuple(sorted((v, int(e)) for v, e in t["mono"].items())): coeff_from_str(P, t["coeff"])
                   for t in d["log_terms"]})
        return cls(L, Cuts(**d["cuts"]))


def is_tame(T: FockElement, prefix: str = "t") -> bool:
    """Every monomial t_{k1}...t_{kr} in F_g must satisfy k1+...+kr <= 3g-3+r."""
    for g, F in T.genus_parts().items():
        for m in F.terms:
            r = sum(e for v, e in m if parse_var(v) and parse_var(v)[0] == prefix)
            ks = sum(e * parse_var(v)[1] for v, e in m if parse_var(v) and parse_var(v)[0] == prefix)
            if ks > 3 * g - 3 + r:
                return False
    return True


def dilaton_shift(F: MPoly, inverse: bool = False) -> MPoly:
    """t(z) = q(z) + z: rewrite a function of t in terms of q (or back).

    The class 1 = phi_0 + phi_inf, so t_{1,i} = q_{1,i} + 1.
    """
    src, dst = ("q", "t") if inverse else ("t", "q")
    sign = -1 if inverse else 1
    mapping = {}
    for v in F.variables():
        p = parse_var(v)
        if p is None or p[0] != src:
            continue
        _, k, i = p
        target = MPoly.var(f"{dst}_{k}_{i}")
        mapping[v] = target + sign if k == 1 else target
    return F.subs(mapping)


# -- linear quantization -------------------------------------------------------

@dataclass(frozen=True)
class LinearHamOp:
    """f^ = sum alpha_{k,i} eps d/dq_{k,i} + sum gamma_{k,i} q_{k,i}/eps."""

    alpha: dict
    gamma: dict
    source: LoopVector | None = None

    def derivation(self) -> "LinearHamOp":
        return LinearHamOp(self.alpha, {}, None)

    def multiplication(self) -> "LinearHamOp":
        return LinearHamOp({}, self.gamma, None)

    def is_zero(self) -> bool:
        return not any(bool(c) for c in self.alpha.values()) and not any(bool(c) for c in self.gamma.values())

    def mult_exponent(self) -> MPoly:
        out = MPoly()
        for (k, i), c in self.gamma.items():
            out = out + MPoly.var(qvar(k, i)) * c
        return out * eps(-1)

    def shift_map(self, variables: Iterable[str]) -> dict:
        out = {}
        for v in variables:
            p = parse_var(v)
            if p is None or p[0] != "q":
                continue
            a = self.alpha.get((p[1], p[2]))
            if a:
                out[v] = MPoly.var(v) + eps() * a
        return out


def quantize_linear(f: LoopVector, P: ParamField) -> LinearHamOp:
    d: DarbouxSplit = darboux(f, P)
    gamma = {key: -c for key, c in d.p.items()}
    return LinearHamOp(dict(d.q), gamma, f)


def _shift(F: MPoly, op: LinearHamOp) -> MPoly:
    mp = op.shift_map(F.variables())
    return F.subs(mp) if mp else F


def apply_vertex(f: LoopVector, T: FockElement, P: ParamField) -> FockElement:
    """(e^f)^ T = exp(f^_-) exp(f^_+) T, exactly at the level of logarithms."""
    op = quantize_linear(f, P)
    return FockElement(_shift(T.L, op) + op.mult_exponent(), T.cuts)


# -- general vectors ---------------------------------------------------------

@dataclass(frozen=True)
class FockVector:
    """P * exp(L)."""

    P: MPoly
    L: MPoly

    @classmethod
    def of(cls, T: FockElement | MPoly) -> "FockVector":
        L = T.L if isinstance(T, FockElement) else T
        return cls(MPoly.const(1), L)

    def D(self, v: str, Pp: MPoly | None = None) -> MPoly:
        """Prefactor of d/dv (Pp exp(L))."""
        Pp = self.P if Pp is None else Pp
        return Pp.diff(v) + Pp * self.L.diff(v)

    def normalized(self, base: MPoly, weight: Callable, cut: int) -> MPoly:
        """Prefactor relative to exp(base), expanding exp(L - base) by ``weight``."""
        extra = self.L - base
        keep = lambda m: weight(m) <= cut
        if not extra:
            return self.P.filter(keep)
        return self.P.mul_trunc(exp_filtered(extra, weight, cut), keep)


def apply_linear(op: LinearHamOp, V: FockVector) -> FockVector:
    """The operator f^ itself (not its exponential)."""
    out = MPoly()
    for (k, i), a in op.alpha.items():
        if a:
            out = out + V.D(qvar(k, i)) * a * eps()
    out = out + V.P * op.mult_exponent()
    return FockVector(out, V.L)


def apply_exp_linear(f: LoopVector, V: FockVector, P: ParamField) -> FockVector:
    """e^{f^} = e^{-Omega(f_-, f_+)/2} e^{f^_-} e^{f^_+}."""
    plus, minus = polarize(f)
    op = quantize_linear(f, P)
    scalar = symplectic_form(minus, plus, P) * Fraction(-1, 2)
    Pn = _shift(V.P, op)
    Ln = _shift(V.L, op) + op.mult_exponent() + MPoly.coerce(scalar)
    return FockVector(Pn, Ln)


def apply_vertex_vector(f: LoopVector, V: FockVector, P: ParamField) -> FockVector:
    op = quantize_linear(f, P)
    return FockVector(_shift(V.P, op), _shift(V.L, op) + op.mult_exponent())


# -- quadratic quantization -------------------------------------------------------

@dataclass(frozen=True)
class QuadHamOp:
    """qq/eps^2 + q d + eps^2 d d terms of a quantized quadratic Hamiltonian."""

    qq: dict
    qp: dict
    pp: dict
    levels: int
    source: LoopOperator | None = None


def _basis(levels: int, P: ParamField):
    out = []
    for k in range(levels + 1):
        for i in INDICES:
            out.append((("q", k, i), LoopVector({k: phi(i)})))
    for k in range(levels + 1):
        for i in INDICES:
            sign = -1 if (k + 1) % 2 else 1
            out.append((("p", k, i), LoopVector({-1 - k: dual(i, P).scale(sign)})))
    return out


def quantize_quadratic(A: LoopOperator, P: ParamField, levels: int) -> QuadHamOp:
    """Quantize h(f) = Omega(A f, f)/2 on the Darboux block of the given depth."""
    if not (A.is_lower() or A.is_upper()):
        raise ValueError("quadratic quantization needs a strictly triangular source")
    basis = _basis(levels, P)
    images = [A(e) for _, e in basis]
    n = len(basis)
    M = [[symplectic_form(images[a], basis[b][1], P) for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(a):
            if M[a][b] - M[b][a]:
                raise ValueError("source is not infinitesimally symplectic")
    qq, qp, pp = {}, {}, {}
    for a in range(n):
        for b in range(a, n):
            c = M[a][b] if a != b else M[a][a] * Fraction(1, 2)
            if not c:
                continue
            (ta, ka, ia), (tb, kb, ib) = basis[a][0], basis[b][0]
            va, vb = qvar(ka, ia), qvar(kb, ib)
            if ta == "q" and tb == "q":
                qq[(va, vb)] = c
            elif ta == "p" and tb == "p":
                pp[(va, vb)] = c
            elif ta == "q":
                qp[(va, vb)] = c
            else:
                qp[(vb, va)] = c
    return QuadHamOp(qq, qp, pp, levels, A)


def apply_quadratic_once(H: QuadHamOp, V: FockVector, sign: int = 1) -> FockVector:
    out = MPoly()
    for (a, b), c in H.qq.items():
        out = out + V.P * MPoly.var(a) * MPoly.var(b) * c * eps(-2)
    for (a, b), c in H.qp.items():
        out = out + MPoly.var(a) * V.D(b) * c
    for (a, b), c in H.pp.items():
        out = out + V.D(a, V.D(b)) * c * eps(2)
    return FockVector(out * sign, V.L)


def apply_quadratic(H: QuadHamOp, V: FockVector, order: int,
                    keep: Callable | None = None, sign: int = 1) -> FockVector:
    """exp(sign * H) V expanded to ``order`` terms; ``keep`` prunes monomials.

    The depth of ``H`` must exceed every level reached, otherwise the
    expansion would silently drop derivative terms.
    """
    top = max((level(v) for v in V.P.variables() | V.L.variables()), default=-1)
    if top + order > H.levels:
        raise ValueError(f"quantized block of depth {H.levels} too shallow for order {order}")
    total = V.P
    cur = V
    for n in range(1, order + 1):
        nxt = apply_quadratic_once(H, cur, sign)
        P = nxt.P * Fraction(1, n)
        if keep is not None:
            P = P.filter(keep)
        cur = FockVector(P, V.L)
        total = total + cur.P
    return FockVector(total if keep is None else total.filter(keep), V.L)


# -- S-conjugation cross-check ---------------------------------------------------------

DELTA = "delta"


def toy_generator(P: ParamField) -> LoopOperator:
    """delta * A_1 z^-1 with A_1 = nu [[1, 1], [-1, -1]]; A_1^2 = 0 so exp(A) = 1 + A."""
    d = MPoly.var(DELTA)
    nu = P.nu
    return LoopOperator({-1: ((d * nu, d * nu), (d * -nu, d * -nu))})


def conjugation_check(f: LoopVector, L: MPoly, P: ParamField, order: int = 2) -> dict[int, bool]:
    """S e^{f^} S^-1 (exp L) against e^{W(f+, f+)/2} e^{(Sf)^} (exp L), per delta-order.

    S = exp(A^) for the toy generator, with the quadratic quantization
    expanded to ``order`` terms on each side.
    """
    A = toy_generator(P)
    levels = max((level(v) for v in L.variables()), default=0) + 2 * order + 2
    H = quantize_quadratic(A, P, levels)
    dw = lambda m: dict(m).get(DELTA, 0)
    keep = lambda m: dw(m) <= order
    fc = f.map(MPoly.coerce)
    V = apply_quadratic(H, FockVector.of(L), order, keep, sign=-1)
    V = apply_vertex_vector(fc, V, P)
    V = apply_quadratic(H, V, order, keep, sign=1)
    lhs = V.P.filter(keep)
    # W(f+, f+) = (S_1 f_0, f_0) for S with only S_1
    W = pairing(mat_apply(A[-1], fc[0]), fc[0], P) * Fraction(1, 2)
    R = apply_vertex_vector(fc + A(fc), FockVector.of(L), P)
    rhs = FockVector(R.P, R.L + W).normalized(V.L, dw, order)
    diff = lhs - rhs
    return {j: not diff.coeff_of(DELTA, j) for j in range(order + 1)}


def commutator_check(f: LoopVector, V: FockVector, P: ParamField) -> bool:
    """[A^, f^] = (A f)^ for the toy generator."""
    A = toy_generator(P)
    levels = max((level(v) for v in V.P.variables() | V.L.variables()), default=0) + 2
    H = quantize_quadratic(A, P, levels)
    fc = f.map(MPoly.coerce)
    op = quantize_linear(fc, P)
    c = apply_quadratic_once(H, apply_linear(op, V)).P - apply_linear(op, apply_quadratic_once(H, V)).P
    return (c - apply_linear(quantize_linear(A(fc), P), V).P).equals(MPoly())
