"""Closed-loop simulator: plants, observers, coder banks, two-mode controller.

Per step k (attempt at time k*delta) the update order is fixed: plant, then
observer, then innovation quantization, then decoder bank, then scale factor,
then controller. Quantization at step k always uses the scale from step k-1,
and the control input computed at step k feeds the plant at step k+1. Jammed
steps skip the decoder correction, freeze the control at zero, and grow the
scale instead of shrinking it.

Internally all signals are propagated as deviations from the average
trajectory x_bar(k) (which obeys x_bar(k) = A x_bar(k-1) because the control
has zero mean). The recursions are identical to the absolute ones, but with an
unstable A the absolute states diverge geometrically and subtracting them
destroys the low-order bits of the consensus error; deviation coordinates keep
every stored quantity at the error scale, so the normalized recursion
identities hold to rounding precision over the whole horizon. Absolute states
in the trace are reconstructed as delta + x_bar.

Every decoded estimate is shared by construction (all receivers consume the
same symbols, scale, and jam flags); debug mode keeps one replica bank per
receiver and verifies bit-identical agreement at every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scenario as scen
from .conditions import DerivedMatrices, build_matrices
from .dos import jammed_mask
from .errors import NotScalar, SaturationAbort
from .graphs import build_laplacian
from .quantizer import QuantizerParams, quantize_array

CSV_FLOAT = repr  # shortest round-trip decimal form


@dataclass
class CodecBank:
    """Coder configuration plus the shared decoded-estimate bank and scale.

    ``d_tilde`` holds the decoded estimates relative to the average
    trajectory; all receivers hold this exact bank by the synchrony argument.
    """

    gamma1: float
    gamma2: float
    theta0: float
    quant: QuantizerParams | None
    d_tilde: np.ndarray
    theta: float
    replicas: np.ndarray | None = None   # (N, N, n) per-receiver banks, debug only

    @classmethod
    def fresh(cls, xbar0: np.ndarray, n_agents: int, gamma1, gamma2, theta0,
              quant, debug=False):
        # Decoders start from zero absolute estimates, i.e. -x_bar(0) in
        # deviation coordinates.
        bank = np.tile(-xbar0, (n_agents, 1))
        replicas = np.tile(bank, (n_agents, 1, 1)) if debug else None
        return cls(gamma1=gamma1, gamma2=gamma2, theta0=theta0, quant=quant,
                   d_tilde=bank, theta=theta0, replicas=replicas)


@dataclass
class SimState:
    k: int
    delta: np.ndarray      # (N, n) plant deviations from the average
    d_hat: np.ndarray      # (N, n) observer deviations
    u: np.ndarray          # (N, w) control computed at this step
    xbar: np.ndarray       # (n,) average trajectory
    jammed: bool
    symbols: np.ndarray    # (N, n) int64 transmitted symbols
    sat_mask: np.ndarray   # (N, n) bool
    replica_divergences: int = 0


@dataclass
class SimTrace:
    mode: str
    delta_s: float
    gamma1: float | None
    gamma2: float | None
    sigma: float | None
    times: np.ndarray
    jammed: np.ndarray
    theta: np.ndarray
    xbar: np.ndarray       # (K+1, n)
    delta: np.ndarray      # (K+1, N, n)
    e_c: np.ndarray
    e_o: np.ndarray
    symbols: np.ndarray    # (K+1, N, n) int64
    sat: np.ndarray        # (K+1, N, n) bool
    replica_divergences: int = 0

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def n_agents(self) -> int:
        return self.delta.shape[1]

    @property
    def x(self) -> np.ndarray:
        """Absolute states, delta + x_bar (diverges when A is unstable)."""
        return self.delta + self.xbar[:, None, :]

    @property
    def x_hat(self) -> np.ndarray:
        return self.x - self.e_o

    def delta_norms(self) -> np.ndarray:
        return np.linalg.norm(self.delta.reshape(len(self.times), -1), axis=1)

    def sat_any(self) -> np.ndarray:
        return self.sat.reshape(len(self.times), -1).any(axis=1)

    def saturation_count(self) -> int:
        return int(self.sat.sum())

    def max_symbol(self) -> int:
        return int(np.abs(self.symbols).max(initial=0))

    def to_csv(self, path_or_buf) -> None:
        """Header: k,t,jammed,theta,sat_any, per-agent delta columns, then
        per-agent symbol columns. Floats use shortest round-trip formatting."""
        close = False
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            fh = open(path_or_buf, "w", encoding="utf-8", newline="\n")
            close = True
        else:
            fh = path_or_buf
        try:
            n_agents, n = self.delta.shape[1], self.delta.shape[2]
            cols = ["k", "t", "jammed", "theta", "sat_any"]
            cols += [f"delta_{i+1}_{d+1}" for i in range(n_agents) for d in range(n)]
            cols += [f"qsym_{i+1}_{d+1}" for i in range(n_agents) for d in range(n)]
            fh.write(",".join(cols) + "\n")
            sat_any = self.sat_any()
            for k in range(len(self.times)):
                row = [
                    str(k),
                    CSV_FLOAT(float(self.times[k])),
                    str(int(self.jammed[k])),
                    CSV_FLOAT(float(self.theta[k])),
                    str(int(sat_any[k])),
                ]
                row += [CSV_FLOAT(float(v)) for v in self.delta[k].ravel()]
                row += [str(int(v)) for v in self.symbols[k].ravel()]
                fh.write(",".join(row) + "\n")
        finally:
            if close:
                fh.close()


def step(
    state: SimState,
    system: scen.SystemSpec,
    codec: CodecBank,
    laplacian: np.ndarray,
    jammed_now: bool,
    jammed_prev: bool,
    observer: bool = True,
    strict: bool = False,
) -> SimState:
    """Advance one sampling period. ``observer=False`` routes exact states into
    the encoder (scalar systems where the output determines the state)."""
    assert state.jammed == jammed_prev, "inconsistent jam flag for previous step"
    a, b = system.a, system.b

    delta_new = state.delta @ a.T + state.u @ b.T
    # The control has zero mean across agents in exact arithmetic; projecting
    # out the rounding dust keeps the deviations mean-free instead of letting
    # an unstable A amplify it geometrically.
    delta_new = delta_new - delta_new.mean(axis=0)
    if observer:
        f = system.effective_f()
        c = system.c_out
        out_err = (state.delta - state.d_hat) @ c.T
        d_hat_new = state.d_hat @ a.T + state.u @ b.T + out_err @ f.T
    else:
        d_hat_new = delta_new

    theta_prev = codec.theta
    coded = (d_hat_new - codec.d_tilde @ a.T) / theta_prev
    qvals, sat_mask = quantize_array(coded, codec.quant)
    if strict and sat_mask.any():
        raise SaturationAbort(state.k + 1)
    symbols = np.rint(qvals / (2.0 * codec.quant.step_sigma)).astype(np.int64)

    divergences = 0
    if jammed_now:
        codec.d_tilde = codec.d_tilde @ a.T
    else:
        codec.d_tilde = codec.d_tilde @ a.T + theta_prev * qvals
    if codec.replicas is not None:
        for i in range(codec.replicas.shape[0]):
            if jammed_now:
                codec.replicas[i] = codec.replicas[i] @ a.T
            else:
                codec.replicas[i] = codec.replicas[i] @ a.T + theta_prev * qvals
            if not np.array_equal(codec.replicas[i], codec.d_tilde):
                divergences += 1
    codec.theta = (codec.gamma2 if jammed_now else codec.gamma1) * theta_prev

    if jammed_now:
        u_new = np.zeros_like(state.u)
    else:
        u_new = -(laplacian @ codec.d_tilde) @ system.k_gain.T

    return SimState(
        k=state.k + 1,
        delta=delta_new,
        d_hat=d_hat_new,
        u=u_new,
        xbar=state.xbar @ a.T,
        jammed=jammed_now,
        symbols=symbols,
        sat_mask=sat_mask,
        replica_divergences=state.replica_divergences + divergences,
    )


class _Recorder:
    def __init__(self, steps, n_agents, n, times):
        shape = (steps + 1, n_agents, n)
        self.times = times
        self.jammed = np.zeros(steps + 1, dtype=bool)
        self.theta = np.ones(steps + 1)
        self.xbar = np.zeros((steps + 1, n))
        self.delta = np.zeros(shape)
        self.e_c = np.zeros(shape)
        self.e_o = np.zeros(shape)
        self.symbols = np.zeros(shape, dtype=np.int64)
        self.sat = np.zeros(shape, dtype=bool)

    def put(self, k, state: SimState, codec: CodecBank | None):
        self.jammed[k] = state.jammed
        if codec is not None:
            self.theta[k] = codec.theta
            self.e_c[k] = state.d_hat - codec.d_tilde
        self.xbar[k] = state.xbar
        self.delta[k] = state.delta
        self.e_o[k] = state.delta - state.d_hat
        self.symbols[k] = state.symbols
        self.sat[k] = state.sat_mask

    def arrays(self) -> dict:
        return {
            "times": self.times,
            "jammed": self.jammed,
            "theta": self.theta,
            "xbar": self.xbar,
            "delta": self.delta,
            "e_c": self.e_c,
            "e_o": self.e_o,
            "symbols": self.symbols,
            "sat": self.sat,
        }


def run(config: scen.ScenarioConfig, debug_replicas: bool = False) -> SimTrace:
    """Simulate a scenario end to end; deterministic for a given config."""
    if config.mode == scen.MODE_SCALAR_UNQUANTIZED:
        return run_scalar_unquantized(config)
    system = config.system
    spectrum = build_laplacian(config.graph())
    lap = spectrum.laplacian
    n_agents, n, w = spectrum.n_agents, system.n, system.n_inputs
    steps = config.n_steps()
    signal = config.resolve_dos()
    jam = (
        jammed_mask(signal, system.delta_s, steps)
        if signal is not None
        else np.zeros(steps, dtype=bool)
    )
    observer = config.mode == scen.MODE_GENERAL

    x0 = config.resolve_initial_states()
    xbar0 = x0.mean(axis=0)
    delta0 = x0 - xbar0
    codec = CodecBank.fresh(
        xbar0, n_agents, config.gamma1, config.gamma2, config.theta0,
        config.quantizer, debug=debug_replicas,
    )
    state = SimState(
        k=0,
        delta=delta0,
        # Observers start at zero absolute state, -x_bar(0) in deviations;
        # the observer-free scalar path sees the plant exactly.
        d_hat=delta0.copy() if not observer else np.tile(-xbar0, (n_agents, 1)),
        u=np.zeros((n_agents, w)),
        xbar=xbar0,
        jammed=False,
        symbols=np.zeros((n_agents, n), dtype=np.int64),
        sat_mask=np.zeros((n_agents, n), dtype=bool),
    )

    times = np.arange(steps + 1) * system.delta_s
    rec = _Recorder(steps, n_agents, n, times)
    rec.put(0, state, codec)
    for k in range(1, steps + 1):
        state = step(
            state, system, codec, lap,
            jammed_now=bool(jam[k - 1]),
            jammed_prev=bool(jam[k - 2]) if k >= 2 else False,
            observer=observer,
            strict=config.strict_saturation,
        )
        rec.put(k, state, codec)
    return SimTrace(
        mode=config.mode,
        delta_s=system.delta_s,
        gamma1=config.gamma1,
        gamma2=config.gamma2,
        sigma=config.quantizer.step_sigma if config.quantizer else None,
        replica_divergences=state.replica_divergences,
        **rec.arrays(),
    )


def run_scalar_unquantized(config: scen.ScenarioConfig) -> SimTrace:
    """Infinite-data-rate scalar baseline: exact states exchanged when the
    channel is clean, open loop otherwise. Time 0 counts as clean (the first
    jamming onset cannot precede the first attempt)."""
    system = config.system
    if (system.n, system.n_inputs, system.n_outputs) != (1, 1, 1):
        raise NotScalar("unquantized baseline requires n = w = v = 1")
    spectrum = build_laplacian(config.graph())
    lap = spectrum.laplacian
    n_agents = spectrum.n_agents
    steps = config.n_steps()
    signal = config.resolve_dos()
    jam = (
        jammed_mask(signal, system.delta_s, steps)
        if signal is not None
        else np.zeros(steps, dtype=bool)
    )
    a = float(system.a[0, 0])
    b = float(system.b[0, 0])
    kg = float(system.k_gain[0, 0])

    x0 = config.resolve_initial_states()
    xbar = x0.mean(axis=0)
    delta = x0 - xbar
    u = -(lap @ delta) * kg
    times = np.arange(steps + 1) * system.delta_s
    rec = _Recorder(steps, n_agents, 1, times)
    zeros_i = np.zeros((n_agents, 1), dtype=np.int64)
    zeros_b = np.zeros((n_agents, 1), dtype=bool)
    state = SimState(k=0, delta=delta, d_hat=delta, u=u, xbar=xbar,
                     jammed=False, symbols=zeros_i, sat_mask=zeros_b)
    rec.put(0, state, None)
    for k in range(1, steps + 1):
        jam_now = bool(jam[k - 1])
        delta = a * delta + b * u
        delta = delta - delta.mean(axis=0)
        u = np.zeros_like(u) if jam_now else -(lap @ delta) * kg
        xbar = a * xbar
        state = SimState(k=k, delta=delta, d_hat=delta, u=u, xbar=xbar,
                         jammed=jam_now, symbols=zeros_i, sat_mask=zeros_b)
        rec.put(k, state, None)
    return SimTrace(
        mode=config.mode,
        delta_s=system.delta_s,
        gamma1=None, gamma2=None, sigma=None,
        **rec.arrays(),
    )


def normalized_oracle(
    trace: SimTrace,
    derived: DerivedMatrices,
    gamma1: float,
    gamma2: float,
    quant: QuantizerParams,
) -> dict:
    """Replay the four-mode normalized recursions against a recorded trace.

    The scaled variables alpha = delta/theta, xi_c = e_c/theta, xi_o = e_o/theta
    obey exact one-step recursions selected by the (current, previous) jam
    flags; this recomputes each prediction from the stacked matrices and
    returns the max-abs residual per mode. Residuals at rounding level confirm
    the simulator realizes those recursions identically.
    """
    g, h, l_big, p = derived.g, derived.h, derived.l_big, derived.p
    a_n, fncn = derived.a_n, derived.f_n_c_n
    afc_n = derived.a_fc_n
    residuals = {"a": 0.0, "b": 0.0, "c": 0.0, "d": 0.0}
    counts = {"a": 0, "b": 0, "c": 0, "d": 0}
    for k in range(1, trace.steps + 1):
        th_prev, th_now = trace.theta[k - 1], trace.theta[k]
        alpha = trace.delta[k - 1].ravel() / th_prev
        xc = trace.e_c[k - 1].ravel() / th_prev
        xo = trace.e_o[k - 1].ravel() / th_prev
        j_now, j_prev = bool(trace.jammed[k]), bool(trace.jammed[k - 1])
        if not j_now and not j_prev:
            case = "a"
            w = h @ xc - l_big @ alpha + p @ xo
            qw, _ = quantize_array(w, quant)
            pred_a = (g @ alpha + l_big @ (xo + xc)) / gamma1
            pred_c = (w - qw) / gamma1
            pred_o = afc_n @ xo / gamma1
        elif not j_now and j_prev:
            case = "b"
            w = a_n @ xc + fncn @ xo
            qw, _ = quantize_array(w, quant)
            pred_a = a_n @ alpha / gamma1
            pred_c = (w - qw) / gamma1
            pred_o = afc_n @ xo / gamma1
        elif j_now and not j_prev:
            case = "c"
            pred_a = (g @ alpha + l_big @ (xo + xc)) / gamma2
            pred_c = (h @ xc - l_big @ alpha + p @ xo) / gamma2
            pred_o = afc_n @ xo / gamma2
        else:
            case = "d"
            pred_a = a_n @ alpha / gamma2
            pred_c = (a_n @ xc + fncn @ xo) / gamma2
            pred_o = afc_n @ xo / gamma2
        act_a = trace.delta[k].ravel() / th_now
        act_c = trace.e_c[k].ravel() / th_now
        act_o = trace.e_o[k].ravel() / th_now
        res = max(
            np.abs(pred_a - act_a).max(),
            np.abs(pred_c - act_c).max(),
            np.abs(pred_o - act_o).max(),
        )
        residuals[case] = max(residuals[case], float(res))
        counts[case] += 1
    residuals["max"] = max(residuals[c] for c in "abcd")
    residuals["counts"] = counts
    return residuals


def oracle_for_config(config: scen.ScenarioConfig, trace: SimTrace) -> dict:
    spectrum = build_laplacian(config.graph())
    derived = build_matrices(config.system, spectrum)
    return normalized_oracle(trace, derived, config.gamma1, config.gamma2, config.quantizer)
