"""Derived closed-loop matrices and every sufficient-condition check.

The checks split into a selection rule on the zooming factors, a dwell-time
restriction on the attack frequency, a quantizer-range requirement for
overflow-free operation, and a ceiling on the combined attack level for
consensus. Scalar systems get a tightened path where the zoom-out factor
drops below the open-loop parameter and the dwell-time restriction vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import dos as dosmod
from .errors import (
    DegenerateFactors,
    DimensionMismatch,
    DisconnectedGraph,
    InvalidParams,
    InvalidRange,
    SelectionViolated,
)
from .graphs import LaplacianSpectrum, build_laplacian
from .matrixtools import growth_constant, induced_2norm, induced_inf_norm, spectral_radius
from .scenario import (
    MODE_GENERAL,
    MODE_SCALAR_QUANTIZED,
    MODE_SCALAR_UNQUANTIZED,
    ScenarioConfig,
    SystemSpec,
)

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class DerivedMatrices:
    """Stacked closed-loop matrices for N agents of state dimension n."""

    a_n: np.ndarray          # I_N (x) A
    f_n_c_n: np.ndarray      # I_N (x) F C
    g: np.ndarray            # A_N - L_G (x) B K
    h: np.ndarray            # A_N + L_G (x) B K
    l_big: np.ndarray        # L_G (x) B K
    p: np.ndarray            # L_big + F_N C_N (coefficient of the observer error
                             # in the innovation; derived from the update chain)
    j_block: np.ndarray      # diag(A - lambda_i B K), consensus eigenvalues only
    s: np.ndarray            # [[A_N, F_N C_N], [0, A_N - F_N C_N]]

    @property
    def a_fc_n(self) -> np.ndarray:
        return self.a_n - self.f_n_c_n


@dataclass
class Verdict:
    passed: bool
    margin: float

    def as_dict(self) -> dict:
        return {"pass": bool(self.passed), "margin": self.margin}


@dataclass
class ConditionReport:
    """Numeric constants plus named pass/fail verdicts with margins.

    Margins are (allowance - demand) in the condition's natural units, so a
    positive margin always means pass-with-room. Fields that do not apply to
    the scenario's mode stay None.
    """

    mode: str = MODE_GENERAL
    rho_a: float | None = None
    rho_j: float | None = None
    rho_afc: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    gamma0: float | None = None
    gamma3: float | None = None
    gamma4: float | None = None
    c_a: float | None = None
    c_j: float | None = None
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    c6: float | None = None
    c7: float | None = None
    zeta: float | None = None
    bound_35: float | None = None
    bound_40: float | None = None
    bound_45: float | None = None
    bound_69: float | None = None
    freq_level: float | None = None
    dos_level: float | None = None
    m_losses: int | None = None
    budget_source: str = "none"
    realized_tau_d: float | None = None
    realized_duty: float | None = None
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def set_verdict(self, name: str, margin: float, strict: bool = True):
        passed = margin > 0 if strict else margin >= 0
        self.verdicts[name] = Verdict(passed=bool(passed), margin=float(margin))

    def to_json_dict(self) -> dict:
        def clean(x):
            if x is None or isinstance(x, (str, int, bool)):
                return x
            if math.isnan(x):
                return "nan"
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return float(x)

        out = {
            "mode": self.mode,
            "rho_A": clean(self.rho_a),
            "rho_J": clean(self.rho_j),
            "rho_AFC": clean(self.rho_afc),
            "gamma1": clean(self.gamma1),
            "gamma2": clean(self.gamma2),
            "gamma0": clean(self.gamma0),
            "gamma3": clean(self.gamma3),
            "gamma4": clean(self.gamma4),
            "c_a": clean(self.c_a),
            "c_j": clean(self.c_j),
            "c1": clean(self.c1),
            "c2": clean(self.c2),
            "c3": clean(self.c3),
            "c4": clean(self.c4),
            "c5": clean(self.c5),
            "c6": clean(self.c6),
            "c7": clean(self.c7),
            "zeta": clean(self.zeta),
            "bound_35": clean(self.bound_35),
            "bound_40": clean(self.bound_40),
            "bound_45": clean(self.bound_45),
            "bound_69": clean(self.bound_69),
            "freq_level": clean(self.freq_level),
            "dos_level": clean(self.dos_level),
            "m_losses": self.m_losses,
            "budget_source": self.budget_source,
            "realized_tau_d": clean(self.realized_tau_d),
            "realized_duty": clean(self.realized_duty),
            "verdicts": {
                name: {"pass": v.passed, "margin": clean(v.margin)}
                for name, v in self.verdicts.items()
            },
        }
        return out


def build_matrices(system: SystemSpec, spectrum: LaplacianSpectrum) -> DerivedMatrices:
    """Assemble the stacked closed-loop matrices from the plant and the graph."""
    a, b, c = system.a, system.b, system.c_out
    k = system.k_gain
    f = system.effective_f()
    n = system.n
    if b.shape != (n, k.shape[0]) or k.shape[1] != n or c.shape[1] != n:
        raise DimensionMismatch(
            f"inconsistent shapes: A{a.shape} B{b.shape} C{c.shape} K{k.shape}"
        )
    if f.shape != (n, c.shape[0]):
        raise DimensionMismatch(f"F{f.shape} incompatible with C{c.shape}")
    n_agents = spectrum.n_agents
    eye = np.eye(n_agents)
    a_n = np.kron(eye, a)
    fc = f @ c
    f_n_c_n = np.kron(eye, fc)
    bk = b @ k
    l_big = np.kron(spectrum.laplacian, bk)
    g = a_n - l_big
    h = a_n + l_big
    p = l_big + f_n_c_n
    j_block = scipy.linalg.block_diag(
        *[a - lam * bk for lam in spectrum.consensus_eigenvalues]
    )
    zero = np.zeros_like(a_n)
    s = np.block([[a_n, f_n_c_n], [zero, a_n - f_n_c_n]])
    return DerivedMatrices(
        a_n=a_n, f_n_c_n=f_n_c_n, g=g, h=h, l_big=l_big, p=p, j_block=j_block, s=s
    )


def _effective_budget(
    scenario: ScenarioConfig, signal
) -> tuple[dosmod.DosBudget, str]:
    """Declared budget if present, else one derived from the realized signal
    averages (eta = kappa = 0), else the no-attack budget."""
    if scenario.budget is not None:
        return scenario.budget, "declared"
    if signal is not None and len(signal.intervals) > 0:
        tau_d_avg, duty = dosmod.averaged_params(signal)
        t_avg = 1.0 / duty if duty > 0 else math.inf
        return (
            dosmod.DosBudget(eta=0.0, tau_d=tau_d_avg, kappa=0.0, T=max(t_avg, 1.0 + 1e-12)),
            "realized_average",
        )
    return dosmod.DosBudget(eta=0.0, tau_d=math.inf, kappa=0.0, T=math.inf), "none"


def zoom_dwell_check(
    report: ConditionReport,
    system: SystemSpec,
    spectrum: LaplacianSpectrum,
    derived: DerivedMatrices,
    gamma1: float,
    gamma2: float,
    budget: dosmod.DosBudget,
    theta0: float,
    sigma: float,
) -> ConditionReport:
    """Zoom-factor selection, dwell-time restriction, and the scaled-state bound
    constants. Raises SelectionViolated when the selection rule fails; a
    failed dwell-time restriction is reported as a verdict, with the bound
    constants still computed (as +inf where contraction is lost)."""
    rho_a = spectral_radius(system.a)
    rho_j = spectral_radius(derived.j_block)
    rho_afc = spectral_radius(system.a_fc())
    report.rho_a, report.rho_j, report.rho_afc = rho_a, rho_j, rho_afc
    report.gamma1, report.gamma2 = gamma1, gamma2

    sel_margin = min(gamma1 - rho_j, 1.0 - gamma1, gamma2 - rho_a)
    report.set_verdict("zoom_selection", sel_margin, strict=True)
    if sel_margin <= 0:
        raise SelectionViolated(
            f"need rho_j < gamma1 < 1 and gamma2 > rho_a "
            f"(rho_j={rho_j:.4f}, gamma1={gamma1}, gamma2={gamma2}, rho_a={rho_a:.4f})"
        )

    c_a = growth_constant(system.a).constant
    c_j = growth_constant(derived.j_block).constant
    c2 = growth_constant(system.a_fc()).constant
    report.c_a, report.c_j, report.c2 = c_a, c_j, c2

    gamma0 = max(rho_j / gamma1, rho_a / gamma2)
    report.gamma0 = gamma0
    ln_caj = math.log(c_a * c_j)
    bound_35 = math.inf if ln_caj <= 1e-300 else -math.log(gamma0) / ln_caj
    report.bound_35 = bound_35

    freq_level = system.delta_s / budget.tau_d
    report.freq_level = freq_level
    margin_35 = bound_35 - freq_level if math.isfinite(bound_35) else math.inf
    report.set_verdict("dwell_frequency", margin_35, strict=True)

    c1 = (c_a * c_j) ** budget.eta
    gamma3 = (c_a * c_j) ** freq_level * gamma0
    report.c1, report.gamma3 = c1, gamma3

    norm_l = induced_2norm(derived.l_big)
    if gamma3 < 1.0:
        c3 = max(
            2.0 * c1 * system.c_x0 / theta0,
            c1 * c_a * norm_l / (1.0 - gamma3)
            * (sigma / gamma1**2 + c2 * system.c_x0 / (gamma1 * theta0)),
        )
    else:
        c3 = math.inf
    report.c3 = c3
    return report


def range_and_consensus_check(
    report: ConditionReport,
    system: SystemSpec,
    spectrum: LaplacianSpectrum,
    derived: DerivedMatrices,
    gamma1: float,
    gamma2: float,
    levels_r: int,
    sigma: float,
    theta0: float,
    budget: dosmod.DosBudget,
) -> ConditionReport:
    """Quantizer-range requirement and the consensus ceiling on the attack level."""
    if not gamma2 > gamma1:
        raise DegenerateFactors(f"gamma2={gamma2} must exceed gamma1={gamma1}")
    c4 = growth_constant(derived.s).constant
    report.c4 = c4
    f = system.effective_f()
    a_fc = system.a_fc()
    cat = np.hstack([system.a, f @ system.c_out])
    zeta = max(1.0, c4 * induced_inf_norm(cat) / gamma2)
    report.zeta = zeta

    norm_l = induced_2norm(derived.l_big)
    norm_h = induced_2norm(derived.h)
    norm_p = induced_2norm(derived.p)
    c2, c3 = report.c2, report.c3
    ratio = system.c_x0 / theta0
    c5 = math.sqrt(
        (c3 * norm_l + norm_h * sigma / gamma1 + norm_p * c2 * ratio) ** 2
        + induced_2norm(a_fc) ** 2 * c2**2 * ratio**2
    )
    report.c5 = c5

    n_agents = spectrum.n_agents
    bound_40 = zeta * c5 * math.sqrt(n_agents * system.n)
    report.bound_40 = bound_40
    capacity = (2 * levels_r + 1) * sigma
    report.set_verdict("quantizer_range", capacity - bound_40, strict=False)

    bound_45 = -math.log(gamma1) / (math.log(gamma2) - math.log(gamma1))
    report.bound_45 = bound_45
    dos_level = budget.dos_level(system.delta_s)
    report.dos_level = dos_level
    report.set_verdict("dos_level", bound_45 - dos_level, strict=True)
    return report


def unquantized_bound(a: float, rho_j: float) -> float:
    """Attack-level ceiling for consensus with unlimited data rate."""
    if not (a > 1.0 > rho_j > 0.0):
        raise InvalidRange(f"need a > 1 > rho_j > 0, got a={a}, rho_j={rho_j}")
    return -math.log(rho_j) / (math.log(a) - math.log(rho_j))


def scalar_gamma2_rule(a: float, rho_j: float, gamma1: float) -> float:
    if not (rho_j < gamma1 < 1.0):
        raise SelectionViolated(f"need rho_j < gamma1 < 1 (rho_j={rho_j}, gamma1={gamma1})")
    if not a > 1.0:
        raise SelectionViolated(f"scalar tightening needs a > 1, got {a}")
    return math.exp(math.log(gamma1) * math.log(a) / math.log(rho_j))


def scalar_check(
    a: float,
    b: float,
    k: float,
    spectrum: LaplacianSpectrum,
    gamma1: float,
    levels_r: int | None,
    sigma: float | None,
    theta0: float,
    budget: dosmod.DosBudget,
    m_losses: int,
    delta_s: float,
    c_x0: float = 1.0,
    gamma2: float | None = None,
    report: ConditionReport | None = None,
) -> ConditionReport:
    """Scalar-system path: derived zoom-out factor, its contraction constants,
    the tightened range requirement, and the recovered attack-level ceiling.

    gamma2 defaults to the log rule; supplying a different value is allowed
    (the rule verdict then fails and the consensus ceiling falls back to the
    general two-factor bound).
    """
    if report is None:
        report = ConditionReport(mode=MODE_SCALAR_QUANTIZED)
    rho_a = abs(a)
    lam = spectrum.consensus_eigenvalues
    rho_j = float(max(abs(a - l * b * k) for l in lam))
    report.rho_a, report.rho_j = rho_a, rho_j

    rule_gamma2 = scalar_gamma2_rule(a, rho_j, gamma1)
    if gamma2 is None:
        gamma2 = rule_gamma2
    report.gamma1, report.gamma2 = gamma1, gamma2
    follows_rule = abs(gamma2 - rule_gamma2) <= 1e-9 * rule_gamma2
    report.set_verdict(
        "zoomout_rule", -abs(gamma2 - rule_gamma2) if not follows_rule else 0.0,
        strict=False,
    )

    bound_69 = unquantized_bound(a, rho_j)
    report.bound_69 = bound_69
    bound_45 = -math.log(gamma1) / (math.log(gamma2) - math.log(gamma1))
    report.bound_45 = bound_45

    # The two ceiling expressions coincide exactly under the log rule.
    second_form = -math.log(rho_j / gamma1) / (
        math.log(a / gamma2) - math.log(rho_j / gamma1)
    )
    identity_gap = abs(bound_45 - second_form)
    if follows_rule:
        report.set_verdict("zoomout_rule_identity", IDENTITY_TOL - identity_gap, strict=False)

    dos_level = budget.dos_level(delta_s)
    report.dos_level = dos_level
    report.freq_level = delta_s / budget.tau_d
    report.set_verdict("positive_success_rate", 1.0 - dos_level, strict=True)

    ceiling = bound_69 if follows_rule else bound_45
    report.set_verdict("dos_level", ceiling - dos_level, strict=True)

    base = (rho_a * gamma1) / (rho_j * gamma2)
    c6 = base ** ((budget.kappa + budget.eta * delta_s) / delta_s)
    gamma4 = base ** dos_level * rho_j / gamma1
    report.c6, report.gamma4 = c6, gamma4
    report.set_verdict("zoom_contraction", 1.0 - gamma4, strict=True)

    if sigma is not None and levels_r is not None:
        if gamma4 < 1.0:
            c7 = max(2.0 * c6 * c_x0 / theta0, c6 * sigma / (gamma1**2 * (1.0 - gamma4)))
        else:
            c7 = math.inf
        report.c7 = c7
        zeta = max(1.0, a / gamma2) ** m_losses
        report.zeta = zeta
        report.m_losses = m_losses
        lap = spectrum.laplacian
        l_mat = b * k * lap
        h_mat = a * np.eye(spectrum.n_agents) + l_mat
        norm_lh = induced_inf_norm(np.hstack([-l_mat, h_mat]))
        bound = zeta * norm_lh * c7 * math.sqrt(spectrum.n_agents)
        report.bound_40 = bound
        capacity = (2 * levels_r + 1) * sigma
        report.set_verdict("quantizer_range", capacity - bound, strict=False)
    return report


def validate(scenario: ScenarioConfig) -> ConditionReport:
    """Full structural and sufficient-condition report for a scenario.

    Never raises for content-level problems: structural failures (disconnected
    graph, unstable gains, broken selection rule) appear as failed verdicts
    and the remaining fields stay None. The scenario itself is not mutated.
    """
    report = ConditionReport(mode=scenario.mode)
    system = scenario.system

    try:
        graph = scenario.graph()
        spectrum = build_laplacian(graph)
        report.set_verdict("graph_connected", spectrum.lambda2, strict=True)
    except (DisconnectedGraph, InvalidParams) as exc:
        report.set_verdict("graph_connected", -1.0, strict=True)
        return report

    try:
        derived = build_matrices(system, spectrum)
    except (DimensionMismatch, InvalidParams):
        report.set_verdict("dims_consistent", -1.0, strict=True)
        return report
    report.set_verdict("dims_consistent", 1.0, strict=True)

    rho_j = spectral_radius(derived.j_block)
    report.rho_j = rho_j
    report.rho_a = spectral_radius(system.a)
    report.set_verdict("controller_stable", 1.0 - rho_j, strict=True)

    signal = scenario.resolve_dos()
    budget, source = _effective_budget(scenario, signal)
    report.budget_source = source
    if signal is not None:
        report.m_losses = dosmod.max_consecutive_losses(
            signal, system.delta_s, scenario.horizon
        )
        if signal.intervals:
            report.realized_tau_d, report.realized_duty = dosmod.averaged_params(signal)
        if scenario.budget is not None:
            # exact audit of the declared budget against the realized signal
            ok = dosmod.verify_budget(signal, scenario.budget)
            report.set_verdict("budget_verified", 1.0 if ok else -1.0, strict=True)
    else:
        report.m_losses = 0
    report.freq_level = system.delta_s / budget.tau_d
    report.dos_level = budget.dos_level(system.delta_s)

    if scenario.mode == MODE_GENERAL:
        rho_afc = spectral_radius(system.a_fc())
        report.rho_afc = rho_afc
        report.set_verdict("observer_stable", 1.0 - rho_afc, strict=True)
        if rho_j >= 1.0 or rho_afc >= 1.0:
            return report
        sigma = scenario.quantizer.step_sigma
        try:
            zoom_dwell_check(
                report, system, spectrum, derived,
                scenario.gamma1, scenario.gamma2, budget, scenario.theta0, sigma,
            )
        except SelectionViolated:
            return report
        range_and_consensus_check(
            report, system, spectrum, derived,
            scenario.gamma1, scenario.gamma2,
            scenario.quantizer.levels_R, sigma, scenario.theta0, budget,
        )
        return report

    a = float(system.a[0, 0])
    b = float(system.b[0, 0])
    k = float(system.k_gain[0, 0])
    if rho_j >= 1.0:
        return report

    if scenario.mode == MODE_SCALAR_UNQUANTIZED:
        try:
            bound_69 = unquantized_bound(a, spectral_radius(derived.j_block))
        except InvalidRange:
            report.set_verdict("zoom_selection", -1.0, strict=True)
            return report
        report.bound_69 = bound_69
        report.set_verdict("positive_success_rate", 1.0 - report.dos_level, strict=True)
        report.set_verdict("dos_level", bound_69 - report.dos_level, strict=True)
        return report

    try:
        scalar_check(
            a, b, k, spectrum,
            scenario.gamma1,
            scenario.quantizer.levels_R if scenario.quantizer else None,
            scenario.quantizer.step_sigma if scenario.quantizer else None,
            scenario.theta0, budget, report.m_losses, system.delta_s,
            c_x0=system.c_x0, gamma2=scenario.gamma2, report=report,
        )
    except SelectionViolated:
        report.set_verdict("zoom_selection", -1.0, strict=True)
    return report
