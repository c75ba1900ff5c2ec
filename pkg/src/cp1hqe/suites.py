"""Verification suites grouped the way the command line exposes them.

Each suite returns a list of :class:`Check` records.  Randomized checks
run once per parameter point; symbolic checks run once on the
:func:`~cp1hqe.params.symbolic_field`.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

from sympy import Poly as SymPoly, rf, symbols

from .params import ParamField, random_fields, symbolic_field

REPORT_SCHEMA = "cp1hqe-report/1"

INTERPRETATIONS = {
    "residue_convention": "Res at lam = infinity with dlam/lam is read as the lam^0 coefficient "
                          "of the expanded bilinear expression.",
    "omega_orientation": "Omega(f, g) = Res_z (f(-z), g(z)) dz with the sign fixed by the Darboux "
                         "normalisation {p_k, q_l} = delta_kl.",
    "cocycle_scalar": "Composed vertex operators report the scalar e^{Omega(f_-, f_+)} instead of "
                      "normalising it away.",
    "integration_constants": "Downward ladder constants are fixed by one level of lookahead.",
    "vacuum_2toda": "2-Toda residuals of the vacuum are reported per (n, m); no vacuum solution "
                    "is presumed.",
    "f_series_check": "The conjugated exponent formula is verified against the direct S f product, "
                      "with D^-1 taken as the Neumann series in s/lam^2.",
    "log_branches": "Logarithms of lam, lam - nu and x are expanded at infinity.",
    "ancestor_truncation": "Ancestor forms are paired with the tameness cancellation order by "
                           "order in the Q-adic and h-adic cuts.",
    "w_definition": "W_kl is defined by sum W_kl z^-k w^-l = (S*(w) S(z) - 1)/(z^-1 + w^-1).",
    "q_degree_cut": "d <= 2 cuts J and S at Q-degree 2 with s kept numeric; comparison windows are "
                    "the z-orders that cut certifies.",
}


@dataclass
class Check:
    identity: str
    suite: str
    criterion: int | None
    passed: bool
    point: dict
    cuts: dict = field(default_factory=dict)
    witness: object = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["status"] = "pass" if self.passed else "fail"
        del d["passed"]
        return d


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    points: int = 5
    K: int = 6
    dmax: int = 3
    order: int = 6
    ms: tuple = (0, 1, 2)
    ns: tuple = (0, 1)

    def __post_init__(self):
        for name in ("points", "K", "dmax", "order"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def fields(self) -> list:
        return random_fields(self.seed, self.points)


def _point(P: ParamField) -> dict:
    return P.describe()


def _str(w):
    return None if w in (None, [], {}) else str(w)


class _Collector:
    def __init__(self, suite: str, criterion: int | None):
        self.suite, self.criterion, self.checks = suite, criterion, []

    def add(self, identity: str, passed: bool, P: ParamField, cuts: dict | None = None, witness=None):
        self.checks.append(Check(identity, self.suite, self.criterion, bool(passed), _point(P),
                                 cuts or {}, None if passed else _str(witness)))


# -- criterion 1 -------------------------------------------------------------------------

def bracket_oracle(k: int) -> list:
    """Coefficients of x(x+1)...(x+k-1), from sympy's rising factorial."""
    x = symbols("x")
    coeffs = SymPoly(rf(x, k).expand(), x).all_coeffs()[::-1]
    return [int(c) for c in coeffs[1:]]


def getzler_suite(cfg: RunConfig) -> list:
    from .getzler import (a_coefficients, a_partial_fraction_oracle, bracket_number, negative_term_identity,
                          positive_term_identity, transform_identity)
    c = _Collector("getzler", 1)
    Y = symbolic_field()
    rows = [(k, [bracket_number(k, i) for i in range(1, k + 1)], bracket_oracle(k)) for k in range(1, cfg.K + 1)]
    bad = [k for k, a, b in rows if a != b]
    c.add("bracket_numbers", not bad, Y, {"K": cfg.K}, bad)
    for P in cfg.fields():
        for sector in ("0", "inf"):
            bad = [k for k in range(cfg.K + 1)
                   if a_coefficients(P, k, 10, sector) != a_partial_fraction_oracle(P, k, 10, sector)]
            c.add(f"a_rows[{sector}]", not bad, P, {"K": cfg.K, "N": 10}, bad)
            bad = [k for k in range(cfg.K + 1) if not negative_term_identity(P, k, sector)]
            c.add(f"negative_term_operator[{sector}]", not bad, P, {"K": cfg.K}, bad)
            bad = [k for k in range(cfg.K + 1) if not positive_term_identity(P, k, 10, sector)]
            c.add(f"positive_term_operator[{sector}]", not bad, P, {"K": cfg.K, "N": 10}, bad)
            for sign in (1, -1):
                ok = transform_identity(P, sign, sector, 6)
                c.add(f"gamma_transform[{'+' if sign > 0 else '-'}chi_{sector}]", ok, P, {"dlam": 6})
    return c.checks


# -- criterion 2 -------------------------------------------------------------------------

def kernel_suite(cfg: RunConfig) -> list:
    from .hqe import ResidualCuts, kernel_equivalence
    c = _Collector("hqe-equivalence", 2)
    cuts = ResidualCuts(y_degree=2, levels=5, eta_degree=1)
    pairs = sorted({(n, m) for n in cfg.ns for m in cfg.ms if abs(n - m) <= 2})
    for P in cfg.fields():
        for n, m in pairs:
            r = kernel_equivalence(P, n, m, cuts, K_eta=2)
            c.add(f"descendant_vs_2toda_kernel[n={n},m={m}]", r.equal and r.descendant_terms > 0, P,
                  {"y_degree": 2, "lam_order": 6, "eta_degree": 1}, r.witness)
    return c.checks


def ancestor_equivalence_suite(cfg: RunConfig) -> list:
    from .smatrix import descendant_ancestor_equivalence
    c = _Collector("hqe-equivalence", None)
    for P in cfg.fields():
        r = descendant_ancestor_equivalence(P, ms=cfg.ms, ns=cfg.ns, d_max=2, dlam=6)
        for step, ok in r.steps.items():
            c.add(f"descendant_to_ancestor_step[{step}]", ok, P, {"d_max": 2, "lam_order": 6},
                  r.details.get(step))
    return c.checks


# -- criterion 3 -------------------------------------------------------------------------

def smatrix_suite(cfg: RunConfig) -> list:
    from .smatrix import (constant_closed_form, phi0_column, s1_pairing, s_matrix, s_matrix_by_dt,
                          unitarity_defect)
    c = _Collector("smatrix", 3)
    for P in cfg.fields():
        S = s_matrix(P, cfg.dmax)
        d = unitarity_defect(S)
        c.add("unitarity", not d and S.depth >= min(cfg.order, 2 * cfg.dmax), P,
              {"d_max": cfg.dmax, "z_order": -S.op.lo}, sorted(d))
        c.add("phi0_column", S.column("0").agrees_with(phi0_column(P, cfg.dmax)), P, {"d_max": cfg.dmax})
    Y = symbolic_field()
    c.add("S1_pairing_symbolic", s1_pairing(Y, "0") == Y.t * Y.nu0 / Y.nu + Y.s / (Y.nu * Y.nu), Y,
          witness=s1_pairing(Y, "0"))
    c.add("S1_pairing_inf_symbolic", s1_pairing(Y, "inf") == constant_closed_form(Y, "inf"), Y)
    A, B = s_matrix(Y, 2), s_matrix_by_dt(Y, 2)
    c.add("S_from_t_derivative_symbolic", all(A.op[m] == B.op[m] for m in range(A.op.lo, 1)), Y, {"d_max": 2})
    return c.checks


# -- criterion 4 -------------------------------------------------------------------------

def modes_suite(cfg: RunConfig) -> list:
    from .loop import CohClass
    from .smatrix import (direct_family, eigenrelation_mismatches, family_mismatches, ladder_family,
                          ladder_mismatches, s_matrix, series_family, transformation_law_mismatches)
    from .vertex import ancestor_mode_seed, mode_down, mode_ladder, mode_up, perturbed_descent
    from .params import numeric_field
    c = _Collector("modes", 4)
    for P in cfg.fields():
        for sector in ("0", "inf"):
            L = mode_ladder(ancestor_mode_seed(P, sector), P, -4, 4)
            bad = [n for n in range(-4, 4)
                   if not (mode_up(L[n], P).equals(L[n + 1]) and mode_down(L[n + 1], P).equals(L[n]))]
            c.add(f"ladder_round_trip[{sector}]", not bad, P, {"n": [-4, 4]}, bad)
        step = perturbed_descent(ancestor_mode_seed(P), P, CohClass(P.one, P.zero))
        clean = perturbed_descent(ancestor_mode_seed(P), P, CohClass(P.zero, P.zero))
        c.add("uniqueness_negative", step is not None and step <= 2 and clean is None, P, {"steps": 2},
              {"perturbed": step, "clean": clean})
        S = s_matrix(P, 2)
        for sector in ("0", "inf"):
            A = direct_family(S, sector, 5)
            bad = family_mismatches(A, series_family(P, sector, 5, S.depth + 6))
            c.add(f"pipeline_direct_vs_series[{sector}]", not bad, P, {"d_max": 2, "lam_order": 5}, bad[:3])
            bad = ladder_mismatches(A, ladder_family(P, sector, 5, -S.depth - 5, 4))
            c.add(f"pipeline_direct_vs_ladder[{sector}]", not bad, P, {"d_max": 2, "lam_order": 5}, bad[:3])
        bad = transformation_law_mismatches(P, "0", 5, 5)
        c.add("transformation_law", not bad, P, {"z_order": 5, "lam_order": 5}, bad[:3])
    P0 = numeric_field(dict(cfg.fields()[0].point, s=0))
    bad = eigenrelation_mismatches(P0, "0") + eigenrelation_mismatches(P0, "inf")
    c.add("eigenrelation_s0", not bad, P0, {"lam_order": 5}, bad)
    return c.checks


# -- criterion 5 -------------------------------------------------------------------------

def phase_suite(cfg: RunConfig) -> list:
    from .smatrix import (cancellation_value, change_lambda, change_x_form, change_xbar1_form, change_xbar_form,
                          commutation_closed_form, commutation_exponent, constant_closed_form, integral_holds,
                          integral_one, integral_two, lambda_residue, phase_derivative_defect,
                          reciprocal_change, s1_pairing, s_matrix, w_closed_form, w_series)
    c = _Collector("phase", 5)
    K = 4
    for P in cfg.fields():
        S = s_matrix(P, 3)
        for sector in ("0", "inf"):
            w = w_series(S, sector, K)
            c.add(f"W_closed_form[{sector}]", w.agrees_with(w_closed_form(P, sector, w.order)), P,
                  {"K": K, "lam_order": w.order - 1}, w.difference_witness(w_closed_form(P, sector, w.order)))
            d = phase_derivative_defect(S, sector, K)
            c.add(f"dW_identity[{sector}]", not d, P, {"K": K}, d)
            c.add(f"integral_1[{sector}]", integral_holds(integral_one(P, sector)), P)
            c.add(f"integral_2[{sector}]", integral_holds(integral_two(P, sector)), P)
    Y = symbolic_field()
    c.add("C0_symbolic", s1_pairing(Y, "0") == constant_closed_form(Y, "0"), Y)
    c.add("Cinf_symbolic", s1_pairing(Y, "inf") == constant_closed_form(Y, "inf"), Y)
    bad = [(m, n, sec) for m in range(-3, 4) for n in range(-3, 4) for sec in ("0", "inf")
           if commutation_exponent(Y, m, n, sec) != commutation_closed_form(Y, m, n, sec)]
    c.add("commutation_exponents_symbolic", not bad, Y, {"m": [-3, 3], "n": [-3, 3]}, bad[:3])
    c.add("cancellation_symbolic", not cancellation_value(Y), Y, witness=cancellation_value(Y))
    C0, Ci = s1_pairing(Y, "0"), s1_pairing(Y, "inf")
    bad = []
    for m in range(-3, 4):
        xf = change_lambda(lambda_residue(Y, "0", m, C0), Y, "0")
        xb = change_lambda(lambda_residue(Y, "inf", m, Ci), Y, "inf")
        flipped = reciprocal_change(xb, Y)
        if (xf.differs_from(change_x_form(Y, m, C0)) is not None
                or xb.differs_from(change_xbar_form(Y, m, Ci)) is not None
                or flipped.differs_from(change_xbar1_form(Y, m, Ci)) is not None
                or xf.exponent - flipped.exponent):
            bad.append(m)
    c.add("exponent_bookkeeping_symbolic", not bad, Y, {"m": [-3, 3]}, bad)
    return c.checks


# -- criterion 6 -------------------------------------------------------------------------

ANCESTOR_CUTS = dict(y_degree=2, x_degree=1, eps_order=2, u_levels=1, q_order=2, h_order=1)
STABILITY_CASES = 20


def ancestor_suite(cfg: RunConfig) -> list:
    from .ancestor import AncestorCuts, hqe_ancestor_reports, hqe_ancestor_residual, random_tame, stable_under
    c = _Collector("hqe-ancestor", 6)
    cuts = AncestorCuts(**ANCESTOR_CUTS)
    ms = tuple(m for m in cfg.ms if m in (0, 1, 2)) or (0, 1, 2)
    rng = random.Random(cfg.seed)
    for P in cfg.fields():
        T = random_tame(P, random.Random(rng.randrange(10 ** 6)))
        reps = hqe_ancestor_reports(T, ms, P, cuts)
        for m, r in reps.items():
            bad = [str(k) for k, v in r.residues.items() if v.four_point_sum()]
            c.add(f"four_point_residue_sum[m={m}]", r.forms and not bad, P, ANCESTOR_CUTS, bad[:2])
    small = AncestorCuts(1, 1, 1, 1, 1, 1)
    names = list(ANCESTOR_CUTS)
    points = cfg.fields()
    for case in range(STABILITY_CASES):
        P = points[case % len(points)]
        name = names[case % len(names)]
        T = random_tame(P, random.Random(rng.randrange(10 ** 6)))
        m = (0, 1, 2)[case % 3]
        ok = stable_under(hqe_ancestor_residual(T, m, P, small), hqe_ancestor_residual(T, m, P, small.deepen(name)))
        c.add(f"truncation_stability[case={case},deepen={name},m={m}]", ok, P, dict(small.__dict__))
    return c.checks


# -- the 2-Toda and descendant evaluators ----------------------------------------------------

def toda_suite(cfg: RunConfig) -> list:
    from .getzler import two_toda_hqe_residual, vacuum_taus
    from .mpoly import MPoly
    c = _Collector("hqe-2toda", None)
    taus = vacuum_taus(range(-3, 5))
    expected = MPoly.var("y:y_0_0") * MPoly.var("eps", -1) * 2
    for P in cfg.fields():
        for n in (0, 1):
            R = two_toda_hqe_residual(taus, n, n, P, y_degree=2, levels=3)
            c.add(f"vacuum_diagonal[n={n}]", R.is_zero(), P, {"y_degree": 2, "levels": 3}, R.witness())
        R = two_toda_hqe_residual(taus, 0, 1, P, y_degree=2, levels=3)
        c.add("vacuum_off_diagonal[n=0,m=1]", R.total().equals(expected), P, {"y_degree": 2, "levels": 3},
              R.witness())
    return c.checks


def descendant_suite(cfg: RunConfig) -> list:
    from .fock import FockElement, qvar
    from .hqe import ResidualCuts, hqe_descendant_residual
    from .mpoly import MPoly
    c = _Collector("hqe-descendant", None)
    L = MPoly.var(qvar(0, "0")) * MPoly.var(qvar(1, "inf")) + MPoly.var(qvar(1, "0"))
    cuts = ResidualCuts(1, 2)
    for P in cfg.fields():
        for n, m in ((0, 0), (1, 0)):
            a = hqe_descendant_residual(FockElement(L), n, m, P, cuts)
            b = hqe_descendant_residual(FockElement(L + MPoly.const(5)), n, m, P, cuts)
            ok = len(a.groups) == len(b.groups) and all(
                (Gb - Ga).equals(MPoly.const(10)) and (Ra - Rb).equals(MPoly())
                for (Ga, Ra), (Gb, Rb) in zip(a.groups, b.groups))
            c.add(f"constant_moves_to_prefactor[n={n},m={m}]", ok, P, {"y_degree": 1, "levels": 2})
            deep = hqe_descendant_residual(FockElement(L), n, m, P, ResidualCuts(1, 3))
            shallow_total = a.total().filter(lambda mono: _max_level(mono) <= 2)
            deep_total = deep.total().filter(lambda mono: _max_level(mono) <= 2)
            c.add(f"stable_under_levels[n={n},m={m}]", (shallow_total - deep_total).equals(MPoly()), P,
                  {"levels": [2, 3]})
    return c.checks


def _max_level(mono) -> int:
    from .fock import level
    out = -1
    for v, _ in mono:
        if v.startswith("y:"):
            out = max(out, level(v[2:]))
    return out


# -- criterion 7 -------------------------------------------------------------------------

FOCK_PAIRS = 50


def _random_loop(rng: random.Random, P: ParamField):
    from .loop import CohClass, LoopVector
    coeffs = {}
    for _ in range(rng.randint(1, 4)):
        k = rng.randint(-3, 2)
        coeffs[k] = CohClass(Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                             Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    return LoopVector(coeffs)


def fock_suite(cfg: RunConfig) -> list:
    from .fock import (FockVector, apply_exp_linear, apply_linear, conjugation_check, qvar, quantize_linear)
    from .loop import symplectic_form
    from .mpoly import MPoly
    c = _Collector("fock", 7)
    L0 = MPoly.var(qvar(0, "0")) * MPoly.var(qvar(1, "inf")) + MPoly.var(qvar(2, "0")) ** 2 \
        + MPoly.var(qvar(0, "inf")) * MPoly.var("eps", -2)
    L1 = MPoly.var(qvar(0, "0")) ** 2 * MPoly.var("eps", -2) * Fraction(1, 3) \
        + MPoly.var(qvar(1, "inf")) * MPoly.var(qvar(0, "0"))
    rng = random.Random(cfg.seed)
    points = cfg.fields()
    heis, comm = [], []
    for i in range(FOCK_PAIRS):
        P = points[i % len(points)]
        f, g = _random_loop(rng, P), _random_loop(rng, P)
        V = FockVector.of(L0)
        fh, gh = quantize_linear(f, P), quantize_linear(g, P)
        w = symplectic_form(f, g, P)
        a = apply_linear(fh, apply_linear(gh, V)).P - apply_linear(gh, apply_linear(fh, V)).P
        if not a.equals(MPoly.const(w)):
            heis.append(i)
        A = apply_exp_linear(f, apply_exp_linear(g, V, P), P)
        B = apply_exp_linear(g, apply_exp_linear(f, V, P), P)
        if not ((A.L - B.L).equals(MPoly.const(w)) and (A.P - B.P).equals(MPoly())):
            comm.append(i)
    c.add("heisenberg_commutator", not heis, points[0], {"pairs": FOCK_PAIRS}, heis)
    c.add("commutation_factor", not comm, points[0], {"pairs": FOCK_PAIRS}, comm)
    for P in points:
        f = _random_loop(rng, P)
        res = conjugation_check(f, L1, P, 2)
        c.add("S_conjugation_vs_quadratic_quantization", all(res.values()), P, {"order": 2},
              [j for j, ok in res.items() if not ok])
    return c.checks


SUITES: dict[str, list[Callable]] = {
    "getzler": [getzler_suite],
    "modes": [modes_suite],
    "smatrix": [smatrix_suite],
    "phase": [phase_suite],
    "fock": [fock_suite],
    "hqe-descendant": [descendant_suite],
    "hqe-ancestor": [ancestor_suite],
    "hqe-2toda": [toda_suite],
    "hqe-equivalence": [kernel_suite, ancestor_equivalence_suite],
}
SUITES["all"] = [fn for name, fns in SUITES.items() for fn in fns]
