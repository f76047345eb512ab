"""Scenario configs: JSON load/save with whole-document validation.

A scenario bundles the plant and gain matrices, the communication graph, the
zooming factors, the quantizer, the attack description, and the run horizon.
Documents are strict: unknown keys are rejected and every violation is
collected before reporting, so a bad file yields one exhaustive error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import dos as dosmod
from . import graphs
from .errors import InvalidParams, ParseError, ValidationError
from .quantizer import QuantizerParams

MODE_GENERAL = "general"
MODE_SCALAR_QUANTIZED = "scalar_quantized"
MODE_SCALAR_UNQUANTIZED = "scalar_unquantized"
MODES = (MODE_GENERAL, MODE_SCALAR_QUANTIZED, MODE_SCALAR_UNQUANTIZED)


@dataclass(frozen=True)
class SystemSpec:
    """Plant (a, b, c_out), gains (k_gain, f_gain), sampling period, init bound."""

    a: np.ndarray
    b: np.ndarray
    c_out: np.ndarray
    k_gain: np.ndarray
    f_gain: np.ndarray | None
    delta_s: float
    c_x0: float

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.c_out.shape[0]

    def effective_f(self) -> np.ndarray:
        """Observer gain; scalar systems without one get the deadbeat choice
        f = a / c, which reproduces the state exactly from the output."""
        if self.f_gain is not None:
            return self.f_gain
        if self.n == 1 and self.n_outputs == 1:
            return self.a / self.c_out[0, 0]
        raise InvalidParams("observer gain required for non-scalar systems")

    def a_fc(self) -> np.ndarray:
        f = self.effective_f()
        return self.a - f @ self.c_out


@dataclass(frozen=True)
class DosConfig:
    """Attack description: explicit intervals, generator parameters, or nothing."""

    intervals: tuple[tuple[float, float], ...] | None = None
    seed: int | None = None
    target_duty: float | None = None
    mean_period: float | None = None

    @property
    def kind(self) -> str:
        if self.intervals is not None:
            return "explicit"
        if self.seed is not None:
            return "generator"
        return "none"

    def resolve(self, horizon: float, delta: float) -> dosmod.DosSignal | None:
        if self.kind == "explicit":
            return dosmod.DosSignal(intervals=self.intervals, horizon=horizon)
        if self.kind == "generator":
            return dosmod.generate_random(
                self.seed, horizon, delta, self.target_duty, self.mean_period
            )
        return None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str | None
    mode: str
    system: SystemSpec
    graph_spec: dict
    gamma1: float | None
    gamma2: float | None
    theta0: float
    quantizer: QuantizerParams | None
    dos: DosConfig
    budget: dosmod.DosBudget | None
    horizon: float
    init_states: tuple[tuple[float, ...], ...] | None
    init_seed: int | None
    settling_horizon: float | None
    strict_saturation: bool

    def graph(self) -> graphs.Graph:
        return _build_graph(self.graph_spec)

    def resolve_dos(self) -> dosmod.DosSignal | None:
        return self.dos.resolve(self.horizon, self.system.delta_s)

    def resolve_initial_states(self) -> np.ndarray:
        n_agents = self.graph_spec["n"]
        if self.init_states is not None:
            return np.array(self.init_states, dtype=float)
        rng = np.random.default_rng(self.init_seed)
        c = self.system.c_x0
        return rng.uniform(-c, c, size=(n_agents, self.system.n))

    def n_steps(self) -> int:
        return dosmod.n_steps(self.horizon, self.system.delta_s)

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def _build_graph(spec: dict) -> graphs.Graph:
    if "preset" in spec:
        return graphs.preset_graph(spec["preset"], spec["n"], spec.get("weight", 1.0))
    return graphs.graph_from_edges(spec["n"], [tuple(e) for e in spec["edges"]])


def _matrix(value, rows, cols, label, errs) -> np.ndarray | None:
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError):
        errs.append(f"system.{label}: not a numeric matrix")
        return None
    if m.ndim != 2:
        errs.append(f"system.{label}: expected a nested list matrix")
        return None
    if rows is not None and m.shape[0] != rows:
        errs.append(f"system.{label}: expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        errs.append(f"system.{label}: expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        errs.append(f"system.{label}: contains non-finite entries")
    return m


def _check_keys(obj: dict, allowed: set[str], where: str, errs: list[str]):
    unknown = set(obj) - allowed
    if unknown:
        errs.append(f"{where}: unknown keys {sorted(unknown)}")


def _positive(value, where, errs, strict=True) -> bool:
    ok = isinstance(value, (int, float)) and math.isfinite(value) and (
        value > 0 if strict else value >= 0
    )
    if not ok:
        errs.append(f"{where}: must be a finite positive number")
    return ok


def load(source) -> ScenarioConfig:
    """Parse a scenario from a JSON document or a path to one.

    Defaults are applied here (theta0 = c_x0, strict_saturation = false, and
    the scalar zoom-out factor derived from the gain spectrum when omitted).
    Raises ParseError on malformed JSON and ValidationError carrying the full
    violation list otherwise.
    """
    import os

    text = source
    if isinstance(source, os.PathLike) or (
        isinstance(source, str) and "\n" not in source and os.path.exists(source)
    ):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    elif isinstance(source, str) and "\n" not in source and source.strip().endswith(".json"):
        raise ParseError(f"cannot read {source}: no such file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be a JSON object")
    return from_dict(doc)


def from_dict(doc: dict) -> ScenarioConfig:
    errs: list[str] = []
    _check_keys(
        doc,
        {
            "name", "mode", "system", "graph", "zoom", "quantizer", "dos",
            "budget", "horizon", "initial_states", "settling_horizon",
            "strict_saturation",
        },
        "scenario",
        errs,
    )

    mode = doc.get("mode")
    if mode not in MODES:
        errs.append(f"mode: expected one of {MODES}, got {mode!r}")
        raise ValidationError(errs)
    scalar_mode = mode != MODE_GENERAL

    sysdoc = doc.get("system")
    if not isinstance(sysdoc, dict):
        errs.append("system: required object missing")
        raise ValidationError(errs)
    _check_keys(sysdoc, {"A", "B", "C", "K", "F", "delta", "c_x0"}, "system", errs)
    a = _matrix(sysdoc.get("A"), None, None, "A", errs)
    n = a.shape[0] if a is not None else None
    if a is not None and a.shape[0] != a.shape[1]:
        errs.append("system.A: must be square")
    b = _matrix(sysdoc.get("B"), n, None, "B", errs)
    w = b.shape[1] if b is not None else None
    c = _matrix(sysdoc.get("C"), None, n, "C", errs)
    v = c.shape[0] if c is not None else None
    k = _matrix(sysdoc.get("K"), w, n, "K", errs)
    f = None
    if sysdoc.get("F") is not None:
        f = _matrix(sysdoc.get("F"), n, v, "F", errs)
    elif not scalar_mode:
        errs.append("system.F: required in general mode")
    delta = sysdoc.get("delta")
    _positive(delta, "system.delta", errs)
    c_x0 = sysdoc.get("c_x0")
    _positive(c_x0, "system.c_x0", errs)
    if scalar_mode and n is not None and (n, w, v) != (1, 1, 1):
        errs.append(f"system: scalar modes require n = w = v = 1, got ({n}, {w}, {v})")

    gdoc = doc.get("graph")
    n_agents = None
    graph_spec: dict = {}
    if not isinstance(gdoc, dict):
        errs.append("graph: required object missing")
    else:
        if "preset" in gdoc:
            _check_keys(gdoc, {"preset", "n", "weight"}, "graph", errs)
            if gdoc.get("preset") not in graphs.PRESETS:
                errs.append(f"graph.preset: unknown preset {gdoc.get('preset')!r}")
        else:
            _check_keys(gdoc, {"n", "edges"}, "graph", errs)
            if not isinstance(gdoc.get("edges"), list):
                errs.append("graph.edges: required for explicit graphs")
        n_agents = gdoc.get("n")
        if not isinstance(n_agents, int) or n_agents < 2:
            errs.append("graph.n: must be an integer >= 2")
            n_agents = None
        graph_spec = dict(gdoc)
    graph = None
    if graph_spec and n_agents is not None and not errs:
        try:
            graph = _build_graph(graph_spec)
            if not graphs.check_connected(graph):
                errs.append("graph: not connected")
        except InvalidParams as exc:
            errs.append(f"graph: {exc}")

    zdoc = doc.get("zoom")
    gamma1 = gamma2 = None
    theta0 = None
    if zdoc is None:
        if mode != MODE_SCALAR_UNQUANTIZED:
            errs.append("zoom: required outside scalar_unquantized mode")
    elif not isinstance(zdoc, dict):
        errs.append("zoom: must be an object")
    else:
        _check_keys(zdoc, {"gamma1", "gamma2", "theta0"}, "zoom", errs)
        gamma1 = zdoc.get("gamma1")
        if gamma1 is not None and not (
            isinstance(gamma1, (int, float)) and 0 < gamma1 < 1
        ):
            errs.append("zoom.gamma1: must lie in (0, 1)")
        if gamma1 is None and mode != MODE_SCALAR_UNQUANTIZED:
            errs.append("zoom.gamma1: required")
        gamma2 = zdoc.get("gamma2")
        if gamma2 is not None and not (isinstance(gamma2, (int, float)) and gamma2 > 1):
            errs.append("zoom.gamma2: must exceed 1")
        if gamma2 is None and mode == MODE_GENERAL:
            errs.append("zoom.gamma2: required in general mode")
        theta0 = zdoc.get("theta0")
        if theta0 is not None:
            _positive(theta0, "zoom.theta0", errs)

    qdoc = doc.get("quantizer")
    quant = None
    if qdoc is None:
        if mode != MODE_SCALAR_UNQUANTIZED:
            errs.append("quantizer: required outside scalar_unquantized mode")
    elif not isinstance(qdoc, dict):
        errs.append("quantizer: must be an object")
    else:
        _check_keys(qdoc, {"levels", "step"}, "quantizer", errs)
        levels = qdoc.get("levels")
        step = qdoc.get("step")
        if not isinstance(levels, int) or levels < 1:
            errs.append("quantizer.levels: must be a positive integer")
        elif not (isinstance(step, (int, float)) and step > 0 and math.isfinite(step)):
            errs.append("quantizer.step: must be a finite positive number")
        else:
            quant = QuantizerParams(levels_R=levels, step_sigma=float(step))

    horizon = doc.get("horizon")
    _positive(horizon, "horizon", errs)
    if (
        isinstance(horizon, (int, float))
        and isinstance(delta, (int, float))
        and delta > 0
        and horizon < delta
    ):
        errs.append("horizon: must be at least one sampling period")

    ddoc = doc.get("dos")
    dcfg = DosConfig()
    if ddoc is not None:
        if not isinstance(ddoc, dict):
            errs.append("dos: must be null or an object")
        elif "intervals" in ddoc:
            _check_keys(ddoc, {"intervals"}, "dos", errs)
            try:
                ivs = tuple((float(h), float(t)) for h, t in ddoc["intervals"])
                if isinstance(horizon, (int, float)) and horizon > 0:
                    dosmod.DosSignal(intervals=ivs, horizon=horizon)
                if isinstance(delta, (int, float)) and ivs and ivs[0][0] < delta:
                    errs.append("dos.intervals: first onset must be at or after delta")
                dcfg = DosConfig(intervals=ivs)
            except (TypeError, ValueError, InvalidParams) as exc:
                errs.append(f"dos.intervals: {exc}")
        elif "generator" in ddoc:
            _check_keys(ddoc, {"generator"}, "dos", errs)
            gen = ddoc["generator"]
            _check_keys(gen, {"seed", "target_duty", "mean_period"}, "dos.generator", errs)
            seed = gen.get("seed")
            duty = gen.get("target_duty")
            period = gen.get("mean_period")
            if not isinstance(seed, int):
                errs.append("dos.generator.seed: must be an integer")
            if not (isinstance(duty, (int, float)) and 0 < duty < 1):
                errs.append("dos.generator.target_duty: must lie in (0, 1)")
            if not (isinstance(period, (int, float)) and period > 0):
                errs.append("dos.generator.mean_period: must be positive")
            if not errs:
                dcfg = DosConfig(seed=seed, target_duty=float(duty), mean_period=float(period))
        else:
            errs.append("dos: expected 'intervals' or 'generator'")

    bdoc = doc.get("budget")
    budget = None
    if bdoc is not None:
        if not isinstance(bdoc, dict):
            errs.append("budget: must be null or an object")
        else:
            _check_keys(bdoc, {"eta", "tau_d", "kappa", "T"}, "budget", errs)
            try:
                budget = dosmod.DosBudget(
                    eta=float(bdoc.get("eta", 0.0)),
                    tau_d=float(bdoc.get("tau_d", 0.0)),
                    kappa=float(bdoc.get("kappa", 0.0)),
                    T=float(bdoc.get("T", 0.0)),
                )
            except (TypeError, ValueError, InvalidParams) as exc:
                errs.append(f"budget: {exc}")

    istates = doc.get("initial_states")
    init_states = None
    init_seed = None
    if isinstance(istates, dict):
        _check_keys(istates, {"seed"}, "initial_states", errs)
        if not isinstance(istates.get("seed"), int):
            errs.append("initial_states.seed: must be an integer")
        else:
            init_seed = istates["seed"]
    elif isinstance(istates, list):
        try:
            arr = np.array(istates, dtype=float)
            if n_agents is not None and n is not None and arr.shape != (n_agents, n):
                errs.append(
                    f"initial_states: expected shape ({n_agents}, {n}), got {arr.shape}"
                )
            elif isinstance(c_x0, (int, float)) and np.abs(arr).max(initial=0.0) > c_x0:
                errs.append("initial_states: entries exceed the declared bound c_x0")
            init_states = tuple(tuple(float(x) for x in row) for row in arr)
        except (TypeError, ValueError):
            errs.append("initial_states: not a numeric matrix")
    elif istates is not None:
        errs.append("initial_states: expected a matrix or {'seed': int}")
    else:
        errs.append("initial_states: required (explicit matrix or {'seed': int})")

    settling = doc.get("settling_horizon")
    if settling is not None:
        _positive(settling, "settling_horizon", errs)
    strict = doc.get("strict_saturation", False)
    if not isinstance(strict, bool):
        errs.append("strict_saturation: must be a boolean")

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        errs.append("name: must be a string")

    if errs:
        raise ValidationError(errs)

    system = SystemSpec(
        a=a, b=b, c_out=c, k_gain=k, f_gain=f, delta_s=float(delta), c_x0=float(c_x0)
    )
    if theta0 is None:
        theta0 = float(c_x0)
    if gamma2 is None and mode == MODE_SCALAR_QUANTIZED:
        gamma2 = derive_scalar_gamma2(system, graph, float(gamma1))

    return ScenarioConfig(
        name=name,
        mode=mode,
        system=system,
        graph_spec=graph_spec,
        gamma1=float(gamma1) if gamma1 is not None else None,
        gamma2=float(gamma2) if gamma2 is not None else None,
        theta0=float(theta0),
        quantizer=quant,
        dos=dcfg,
        budget=budget,
        horizon=float(horizon),
        init_states=init_states,
        init_seed=init_seed,
        settling_horizon=float(settling) if settling is not None else None,
        strict_saturation=strict,
    )


def derive_scalar_gamma2(system: SystemSpec, graph: graphs.Graph, gamma1: float) -> float:
    """Zoom-out factor for scalar systems: ln(g2) = ln(g1) * ln(a) / ln(rho_j)."""
    spectrum = graphs.build_laplacian(graph)
    a = float(system.a[0, 0])
    bk = float(system.b[0, 0] * system.k_gain[0, 0])
    rho_j = max(abs(a - lam * bk) for lam in spectrum.consensus_eigenvalues)
    if not (rho_j < gamma1 < 1.0) or a <= 1.0:
        raise ValidationError(
            [f"zoom.gamma1: need rho_j < gamma1 < 1 and a > 1 (rho_j={rho_j:.4f}, a={a})"]
        )
    return float(math.exp(math.log(gamma1) * math.log(a) / math.log(rho_j)))


def to_dict(cfg: ScenarioConfig) -> dict:
    doc: dict = {}
    if cfg.name is not None:
        doc["name"] = cfg.name
    doc["mode"] = cfg.mode
    sysdoc = {
        "A": cfg.system.a.tolist(),
        "B": cfg.system.b.tolist(),
        "C": cfg.system.c_out.tolist(),
        "K": cfg.system.k_gain.tolist(),
    }
    if cfg.system.f_gain is not None:
        sysdoc["F"] = cfg.system.f_gain.tolist()
    sysdoc["delta"] = cfg.system.delta_s
    sysdoc["c_x0"] = cfg.system.c_x0
    doc["system"] = sysdoc
    doc["graph"] = dict(cfg.graph_spec)
    zoom: dict = {}
    if cfg.gamma1 is not None:
        zoom["gamma1"] = cfg.gamma1
    if cfg.gamma2 is not None:
        zoom["gamma2"] = cfg.gamma2
    zoom["theta0"] = cfg.theta0
    if zoom:
        doc["zoom"] = zoom
    if cfg.quantizer is not None:
        doc["quantizer"] = {
            "levels": cfg.quantizer.levels_R,
            "step": cfg.quantizer.step_sigma,
        }
    if cfg.dos.kind == "explicit":
        doc["dos"] = {"intervals": [[h, t] for h, t in cfg.dos.intervals]}
    elif cfg.dos.kind == "generator":
        doc["dos"] = {
            "generator": {
                "seed": cfg.dos.seed,
                "target_duty": cfg.dos.target_duty,
                "mean_period": cfg.dos.mean_period,
            }
        }
    else:
        doc["dos"] = None
    if cfg.budget is not None:
        doc["budget"] = {
            "eta": cfg.budget.eta,
            "tau_d": cfg.budget.tau_d,
            "kappa": cfg.budget.kappa,
            "T": cfg.budget.T,
        }
    doc["horizon"] = cfg.horizon
    if cfg.init_states is not None:
        doc["initial_states"] = [list(row) for row in cfg.init_states]
    else:
        doc["initial_states"] = {"seed": cfg.init_seed}
    if cfg.settling_horizon is not None:
        doc["settling_horizon"] = cfg.settling_horizon
    doc["strict_saturation"] = cfg.strict_saturation
    return doc


def save(cfg: ScenarioConfig) -> str:
    """Serialize; load(save(cfg)) reproduces cfg structurally."""
    return json.dumps(to_dict(cfg), indent=2) + "\n"
