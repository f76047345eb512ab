"""Command-line entry point.

Subcommands:
  check <file>                      condition report, writes conditions.json
  simulate <file> --out DIR         trace.csv + conditions.json + summary.json
  sweep <file> --axis NAME ...      concurrent runs over a parameter grid
  repro <name>                      shipped scenarios with built-in assertions

Exit codes: 0 success / all verdicts pass, 1 condition failure or strict-mode
saturation or failed repro assertion, 2 unusable input.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import conditions, dos as dosmod, scenario as scen, simulation, svgplot
from .errors import ParseError, QConsensusError, SaturationAbort, ValidationError

log = logging.getLogger("qconsensus")

SWEEP_AXES = ("duty", "gamma1", "gamma2", "levels", "seed")
REPRO_NAMES = ("example-a", "example-scalar", "example-scalar-unquantized")


@dataclasses.dataclass
class CommandResult:
    exit_code: int
    artifacts_written: list[str] = dataclasses.field(default_factory=list)


def _setup_logging():
    level = os.environ.get("QC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(path: str) -> scen.ScenarioConfig | None:
    try:
        return scen.load(path)
    except ParseError as exc:
        print(f"error: cannot parse scenario: {exc}", file=sys.stderr)
    except ValidationError as exc:
        print("error: invalid scenario:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
    return None


def _print_report(report: conditions.ConditionReport):
    num = report.to_json_dict()
    print(f"mode: {report.mode}")
    for key in ("rho_A", "rho_J", "rho_AFC", "gamma1", "gamma2", "gamma0",
                "gamma3", "gamma4", "c_a", "c_j", "c1", "c2", "c3", "c4", "c5",
                "c6", "c7", "zeta", "bound_35", "bound_40", "bound_45",
                "bound_69", "freq_level", "dos_level", "m_losses",
                "realized_tau_d", "realized_duty"):
        val = num[key]
        if val is not None:
            print(f"  {key:<12} {val}")
    print(f"  budget from: {report.budget_source}")
    for name, verdict in report.verdicts.items():
        tag = "PASS" if verdict.passed else "FAIL"
        print(f"  [{tag}] {name:<24} margin={verdict.margin:.6g}")


def _write_json(path: Path, payload: dict) -> str:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return str(path)


def cmd_check(scenario_path: str, out_dir: str = ".") -> CommandResult:
    config = _load(scenario_path)
    if config is None:
        return CommandResult(exit_code=2)
    report = conditions.validate(config)
    _print_report(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifact = _write_json(out / "conditions.json", report.to_json_dict())
    return CommandResult(exit_code=0 if report.all_pass() else 1,
                         artifacts_written=[artifact])


def _jam_spans(signal: dosmod.DosSignal | None) -> list[tuple[float, float]]:
    if signal is None:
        return []
    return [(h, h + t) for h, t in signal.intervals]


def _summary(config: scen.ScenarioConfig, trace: simulation.SimTrace) -> dict:
    norms = trace.delta_norms()
    signal = config.resolve_dos()
    realized = None
    if signal is not None and len(signal.intervals) > 0:
        tau_d_avg, duty = dosmod.averaged_params(signal)
        n_trans, jam_time = dosmod.measure(signal, 0.0, signal.horizon)
        realized = {
            "transitions": n_trans,
            "jammed_time": jam_time,
            "tau_d_avg": tau_d_avg,
            "duty": duty,
            "max_consecutive_losses": dosmod.max_consecutive_losses(
                signal, config.system.delta_s, config.horizon),
        }
    return {
        "initial_delta_norm": float(norms[0]),
        "final_delta_norm": float(norms[-1]),
        "max_abs_symbol": trace.max_symbol(),
        "saturation_count": trace.saturation_count(),
        "steps": trace.steps,
        "realized_dos": realized,
        "resolved_config": scen.to_dict(config),
    }


def _write_plots(out: Path, trace: simulation.SimTrace, spans) -> list[str]:
    t = trace.times
    n_agents, n = trace.x.shape[1], trace.x.shape[2]
    delta_series = {
        f"delta_{i+1}_{d+1}": trace.delta[:, i, d]
        for i in range(n_agents) for d in range(n)
    }
    sym_series = {
        f"q_{i+1}_{d+1}": trace.symbols[:, i, d]
        for i in range(n_agents) for d in range(n)
    }
    paths = []
    p = out / "delta.svg"
    svgplot.line_chart(str(p), "disagreement components", t, delta_series,
                       spans, y_label="delta")
    paths.append(str(p))
    p = out / "theta.svg"
    svgplot.line_chart(str(p), "quantizer scale", t, {"theta": trace.theta},
                       spans, y_label="theta", log_y=True)
    paths.append(str(p))
    p = out / "symbols.svg"
    svgplot.line_chart(str(p), "transmitted symbols", t, sym_series,
                       spans, y_label="symbol index")
    paths.append(str(p))
    return paths


def cmd_simulate(scenario_path: str, out_dir: str, strict: bool = False,
                 plot: bool = False) -> CommandResult:
    config = _load(scenario_path)
    if config is None:
        return CommandResult(exit_code=2)
    if strict:
        config = config.with_overrides(strict_saturation=True)
    report = conditions.validate(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = [_write_json(out / "conditions.json", report.to_json_dict())]
    try:
        trace = simulation.run(config)
    except SaturationAbort as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return CommandResult(exit_code=1, artifacts_written=artifacts)
    csv_path = out / "trace.csv"
    trace.to_csv(csv_path)
    artifacts.append(str(csv_path))
    artifacts.append(_write_json(out / "summary.json", _summary(config, trace)))
    if plot:
        artifacts += _write_plots(out, trace, _jam_spans(config.resolve_dos()))
    norms = trace.delta_norms()
    print(f"steps={trace.steps} final |delta|={norms[-1]:.6g} "
          f"saturations={trace.saturation_count()} max|symbol|={trace.max_symbol()}")
    return CommandResult(exit_code=0, artifacts_written=artifacts)


def _apply_axis(config: scen.ScenarioConfig, axis: str, value: float) -> scen.ScenarioConfig:
    if axis == "duty":
        if config.dos.kind != "generator":
            raise QConsensusError("duty sweep needs a generator attack spec")
        return config.with_overrides(
            dos=dataclasses.replace(config.dos, target_duty=float(value)))
    if axis == "gamma1":
        return config.with_overrides(gamma1=float(value))
    if axis == "gamma2":
        return config.with_overrides(gamma2=float(value))
    if axis == "levels":
        quant = dataclasses.replace(config.quantizer, levels_R=int(value))
        return config.with_overrides(quantizer=quant)
    if axis == "seed":
        cfg = config
        if cfg.dos.kind == "generator":
            cfg = cfg.with_overrides(dos=dataclasses.replace(cfg.dos, seed=int(value)))
        if cfg.init_states is None:
            cfg = cfg.with_overrides(init_seed=int(value))
        return cfg
    raise QConsensusError(f"unknown sweep axis {axis!r}")


def _sweep_one(args: tuple) -> dict:
    config_doc, axis, value, strict = args
    config = scen.from_dict(config_doc)
    config = _apply_axis(config, axis, value)
    if strict:
        config = config.with_overrides(strict_saturation=True)
    try:
        trace = simulation.run(config)
    except SaturationAbort as exc:
        return {"value": value, "final_delta_norm": float("nan"),
                "initial_delta_norm": float("nan"),
                "saturation_count": -1, "aborted_at": exc.step}
    norms = trace.delta_norms()
    return {
        "value": value,
        "final_delta_norm": float(norms[-1]),
        "initial_delta_norm": float(norms[0]),
        "saturation_count": trace.saturation_count(),
        "aborted_at": None,
    }


def cmd_sweep(scenario_path: str, axis: str, values: list[float], out_dir: str,
              jobs: int | None = None, strict: bool = False) -> CommandResult:
    if axis not in SWEEP_AXES:
        print(f"error: unknown sweep axis {axis!r} (choose from {SWEEP_AXES})",
              file=sys.stderr)
        return CommandResult(exit_code=2)
    if not values:
        print("error: empty value list", file=sys.stderr)
        return CommandResult(exit_code=2)
    config = _load(scenario_path)
    if config is None:
        return CommandResult(exit_code=2)
    try:
        _apply_axis(config, axis, values[0])
    except QConsensusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(exit_code=2)

    doc = scen.to_dict(config)
    tasks = [(doc, axis, v, strict) for v in values]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweep_path = out / "sweep.csv"
    with open(sweep_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value,final_delta_norm,initial_delta_norm,saturation_count\n")
        for row in rows:
            fh.write(f"{row['value']!r},{row['final_delta_norm']!r},"
                     f"{row['initial_delta_norm']!r},{row['saturation_count']}\n")
            log.info("sweep %s=%s -> final=%s", axis, row["value"],
                     row["final_delta_norm"])
    print(f"wrote {sweep_path} ({len(rows)} rows)")
    return CommandResult(exit_code=0, artifacts_written=[str(sweep_path)])


def scenario_dir() -> Path:
    """Shipped scenario files; repo layout first, then the working directory."""
    candidates = [
        Path(__file__).resolve().parents[2] / "scenarios",
        Path.cwd() / "scenarios",
    ]
    env = os.environ.get("QC_SCENARIOS")
    if env:
        candidates.insert(0, Path(env))
    for cand in candidates:
        if cand.is_dir():
            return cand
    raise QConsensusError("cannot locate the scenarios/ directory")


def _approx(label: str, actual: float, expected: float, tol: float,
            failures: list[str]):
    if not (abs(actual - expected) <= tol):
        failures.append(f"{label}: got {actual}, want {expected} +- {tol}")
    print(f"  {label}: {actual:.6g} (target {expected} +- {tol}) "
          f"{'ok' if abs(actual - expected) <= tol else 'MISMATCH'}")


def cmd_repro(which: str, out_dir: str | None = None) -> CommandResult:
    if which not in REPRO_NAMES:
        print(f"error: unknown repro target {which!r} (choose from {REPRO_NAMES})",
              file=sys.stderr)
        return CommandResult(exit_code=2)
    path = scenario_dir() / (which.replace("-", "_") + ".json")
    out = Path(out_dir) if out_dir else Path(f"repro_{which}")
    config = _load(str(path))
    if config is None:
        return CommandResult(exit_code=2)
    report = conditions.validate(config)
    failures: list[str] = []
    print(f"reproduction: {which}")

    if which == "example-a":
        _approx("rho(A)", report.rho_a, 1.2731, 5e-4, failures)
        _approx("rho(J)", report.rho_j, 0.8146, 5e-4, failures)
        _approx("rho(A-FC)", report.rho_afc, 0.81, 5e-3, failures)
        _approx("C_A", report.c_a, 1.0607, 2e-2, failures)
        _approx("C_J", report.c_j, 1.1070, 2e-2, failures)
        _approx("gamma0", report.gamma0, 0.9583, 1e-4, failures)
        _approx("dos ceiling", report.bound_45, 0.3257, 1e-4, failures)
        trace = simulation.run(config, debug_replicas=True)
        ok_theta = _theta_law_holds(trace)
        print(f"  theta multiplicative law exact: {ok_theta}")
        if not ok_theta:
            failures.append("theta ratio deviates from the zoom factors")
        if trace.replica_divergences:
            failures.append(f"{trace.replica_divergences} replica divergences")
        norms = trace.delta_norms()
        ratio = norms[-1] / norms[0]
        print(f"  |delta| contraction over 10 s: {ratio:.3e}")
        if not ratio <= 0.05:
            failures.append(f"consensus not reached (ratio {ratio})")
        if trace.saturation_count():
            failures.append("quantizer saturated")
    elif which == "example-scalar":
        _approx("gamma2", report.gamma2, 1.0962, 1e-4, failures)
        _approx("dos ceiling", report.bound_69, 0.8134, 1e-4, failures)
        if not report.verdicts["zoomout_rule_identity"].passed:
            failures.append("ceiling identity violated")
        trace = simulation.run(config)
        norms = trace.delta_norms()
        print(f"  final |delta| = {norms[-1]:.3e} (initial {norms[0]:.3e})")
        if not norms[-1] <= 0.05 * norms[0]:
            failures.append("scalar consensus not reached")
    else:
        _approx("dos ceiling", report.bound_69, 0.8134, 1e-4, failures)
        signal = config.resolve_dos()
        level = _realized_level(signal, config.system.delta_s)
        print(f"  realized attack level: {level:.4f} (ceiling 0.8134)")
        if not level < report.bound_69:
            failures.append("attack level not inside the unquantized ceiling")
        trace = simulation.run(config)
        norms = trace.delta_norms()
        env_ok = _envelope_holds(config, trace)
        print(f"  decay envelope respected: {env_ok}")
        if not env_ok:
            failures.append("trajectory exceeds the guaranteed decay envelope")
        if not norms[-1] <= 1e-3 * norms[1]:
            failures.append(f"no consensus: final/start = {norms[-1]/norms[1]:.3e}")

    out.mkdir(parents=True, exist_ok=True)
    artifacts = [_write_json(out / "conditions.json", report.to_json_dict())]
    trace.to_csv(out / "trace.csv")
    artifacts.append(str(out / "trace.csv"))
    artifacts.append(_write_json(out / "summary.json", _summary(config, trace)))
    artifacts += _write_plots(out, trace, _jam_spans(config.resolve_dos()))
    for msg in failures:
        print(f"  ASSERTION FAILED: {msg}")
    print("result:", "PASS" if not failures else "FAIL")
    return CommandResult(exit_code=0 if not failures else 1,
                         artifacts_written=artifacts)


def _theta_law_holds(trace: simulation.SimTrace) -> bool:
    for k in range(1, trace.steps + 1):
        factor = trace.gamma2 if trace.jammed[k] else trace.gamma1
        if trace.theta[k] != factor * trace.theta[k - 1]:
            return False
    return True


def _realized_level(signal: dosmod.DosSignal | None, delta: float) -> float:
    if signal is None or not signal.intervals:
        return 0.0
    tau_d_avg, duty = dosmod.averaged_params(signal)
    return duty + delta / tau_d_avg


def _envelope_holds(config: scen.ScenarioConfig, trace: simulation.SimTrace) -> bool:
    """Unquantized decay envelope from the tightly fitted attack budget."""
    signal = config.resolve_dos()
    system = config.system
    a = float(system.a[0, 0])
    spectrum = simulation.build_laplacian(config.graph())
    bk = float(system.b[0, 0] * system.k_gain[0, 0])
    rho_j = max(abs(a - lam * bk) for lam in spectrum.consensus_eigenvalues)
    if signal is None or not signal.intervals:
        budget = dosmod.DosBudget(eta=0.0, tau_d=math.inf, kappa=0.0, T=math.inf)
    else:
        tau_d_avg, duty = dosmod.averaged_params(signal)
        budget = dosmod.fit_min_budget(signal, tau_d_avg, 1.0 / duty)
    level = budget.dos_level(system.delta_s)
    if level >= unq_bound(a, rho_j):
        return True  # envelope not guaranteed; nothing to check
    gamma_u = rho_j ** (1.0 - level) * a ** level
    c_u = (a / rho_j) ** ((budget.kappa + budget.eta * system.delta_s) / system.delta_s)
    norms = trace.delta_norms()
    base = norms[1]
    for k in range(1, trace.steps + 1):
        if norms[k] > c_u * gamma_u ** (k - 1) * base * (1.0 + 1e-9):
            return False
    return True


def unq_bound(a: float, rho_j: float) -> float:
    return conditions.unquantized_bound(a, rho_j)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(prog="qconsensus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate all conditions for a scenario")
    p_check.add_argument("scenario")
    p_check.add_argument("--out", default=".")

    p_sim = sub.add_parser("simulate", help="run a scenario and dump artifacts")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--strict", action="store_true",
                       help="abort on quantizer saturation")
    p_sim.add_argument("--plot", action="store_true", help="emit SVG charts")

    p_sweep = sub.add_parser("sweep", help="run a grid over one parameter")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numeric list")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.add_argument("--strict", action="store_true")

    p_repro = sub.add_parser("repro", help="reproduce a shipped scenario")
    p_repro.add_argument("name", choices=list(REPRO_NAMES))
    p_repro.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    if args.command == "check":
        result = cmd_check(args.scenario, args.out)
    elif args.command == "simulate":
        result = cmd_simulate(args.scenario, args.out, strict=args.strict,
                              plot=args.plot)
    elif args.command == "sweep":
        try:
            values = [float(v) for v in args.values.split(",") if v.strip() != ""]
        except ValueError:
            print("error: --values must be a comma-separated numeric list",
                  file=sys.stderr)
            return 2
        result = cmd_sweep(args.scenario, args.axis, values, args.out,
                           jobs=args.jobs, strict=args.strict)
    else:
        result = cmd_repro(args.name, args.out)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
