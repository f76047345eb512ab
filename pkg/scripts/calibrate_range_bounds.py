#!/usr/bin/env python3
"""Try to reproduce the published quantizer-range requirements.

The published example reports right-hand sides of 301920 (general example) and
183890 (scalar example) for the quantizer-range requirement, but the scale
bound c_x0, the initial zoom theta0, the step sigma, and the declared attack
budget (eta, tau_d, kappa, T) behind those numbers are not printed. This
script pins theta0 = c_x0 = 1 and sigma = 1 and scans the only remaining free
input, the declared budget, over a coarse documented grid. If some budget
reproduces the published number within 5 percent the calibration is declared
successful and the budget recorded; otherwise the full constant breakdown is
recorded and the published value marked unreproduced.
"""

import itertools
import json
import sys

sys.path.insert(0, "src")

import numpy as np  # noqa: E402

from qconsensus import conditions, dos, graphs, scenario as scen  # noqa: E402

TARGET_GENERAL = 301920.0
TARGET_SCALAR = 183890.0
TOLERANCE = 0.05


def _published_system() -> scen.SystemSpec:
    return scen.SystemSpec(
        a=np.array([[1.1162, 0.1109], [0.2218, 1.1162]]),
        b=np.array([[0.1052, 0.0053], [0.0, 0.1052]]),
        c_out=np.array([[1.0, 2.0]]),
        k_gain=np.diag([4.2, 4.2]),
        f_gain=np.array([[0.2757], [0.2134]]),
        delta_s=0.1,
        c_x0=1.0,
    )


def calibrate_general() -> dict:
    """Scan declared (eta, kappa) for the 2-state example; tau_d and 1/T are
    pinned to the published whole-horizon averages 0.6667 and 0.19."""
    system = _published_system()
    spectrum = graphs.build_laplacian(graphs.preset_graph("star", 4))
    derived = conditions.build_matrices(system, spectrum)
    best = None
    for eta, kappa in itertools.product([0, 1, 2, 3, 4, 6, 8], [0.0, 0.5, 1.0, 2.0]):
        budget = dos.DosBudget(eta=eta, tau_d=10.0 / 15.0, kappa=kappa, T=1.0 / 0.19)
        report = conditions.ConditionReport()
        conditions.zoom_dwell_check(report, system, spectrum, derived, 0.85, 1.4,
                                budget, theta0=1.0, sigma=1.0)
        conditions.range_and_consensus_check(report, system, spectrum, derived, 0.85, 1.4,
                                  levels_r=1, sigma=1.0, theta0=1.0, budget=budget)
        gap = abs(report.bound_40 - TARGET_GENERAL)
        if best is None or gap < best["gap"]:
            best = {
                "target": TARGET_GENERAL,
                "achieved": report.bound_40,
                "gap": gap,
                "budget": {"eta": eta, "tau_d": 10.0 / 15.0, "kappa": kappa,
                           "T": 1.0 / 0.19},
                "constants": {
                    "c_a": report.c_a, "c_j": report.c_j, "c1": report.c1,
                    "c2": report.c2, "c3": report.c3, "c4": report.c4,
                    "c5": report.c5, "zeta": report.zeta,
                    "gamma0": report.gamma0, "gamma3": report.gamma3,
                },
            }
    best["reproduced"] = bool(best["gap"] <= TOLERANCE * TARGET_GENERAL)
    best["pinned"] = {"theta0": 1.0, "c_x0": 1.0, "sigma": 1.0,
                      "gamma1": 0.85, "gamma2": 1.4}
    return best


def calibrate_scalar(m_losses: int | None = None) -> dict:
    """Scan the declared attack level for the scalar example; the range
    requirement diverges as the level approaches the consensus ceiling, so the
    published number pins the level sharply once eta and kappa are fixed."""
    spectrum = graphs.build_laplacian(graphs.preset_graph("star", 4))
    if m_losses is None:
        cfg = scen.load("scenarios/example_scalar.json")
        signal = cfg.resolve_dos()
        m_losses = dos.max_consecutive_losses(signal, 0.1, cfg.horizon)
    tau_d = 0.8929
    best = None
    for eta, kappa in itertools.product([0, 1, 2], [0.0, 0.5, 1.0]):
        for level in np.linspace(0.55, 0.81, 1041):
            inv_t = level - 0.1 / tau_d
            if inv_t <= 0 or inv_t >= 1:
                continue
            budget = dos.DosBudget(eta=eta, tau_d=tau_d, kappa=kappa, T=1.0 / inv_t)
            report = conditions.scalar_check(
                a=1.1, b=1.0, k=0.44, spectrum=spectrum, gamma1=0.67,
                levels_r=1, sigma=1.0, theta0=1.0, budget=budget,
                m_losses=m_losses, delta_s=0.1,
            )
            if report.bound_40 is None or not np.isfinite(report.bound_40):
                continue
            gap = abs(report.bound_40 - TARGET_SCALAR)
            if best is None or gap < best["gap"]:
                best = {
                    "target": TARGET_SCALAR,
                    "achieved": report.bound_40,
                    "gap": gap,
                    "budget": {"eta": eta, "tau_d": tau_d, "kappa": kappa,
                               "T": 1.0 / inv_t, "level": float(level)},
                    "constants": {
                        "c6": report.c6, "c7": report.c7, "gamma4": report.gamma4,
                        "zeta": report.zeta, "m_losses": m_losses,
                        "gamma2": report.gamma2,
                    },
                }
    best["reproduced"] = bool(best["gap"] <= TOLERANCE * TARGET_SCALAR)
    best["pinned"] = {"theta0": 1.0, "c_x0": 1.0, "sigma": 1.0, "gamma1": 0.67}
    return best


if __name__ == "__main__":
    general = calibrate_general()
    scalar = calibrate_scalar()
    print(json.dumps({"general": general, "scalar": scalar}, indent=2))
    for name, res in (("general", general), ("scalar", scalar)):
        verdict = "REPRODUCED" if res["reproduced"] else "UNREPRODUCED"
        print(f"{name}: target {res['target']:.0f} achieved {res['achieved']:.0f} "
              f"-> {verdict}")
