"""DoS attack signals: representation, generation, measurement, budget audits.

A signal is an ordered list of half-open jamming intervals [h_q, h_q + tau_q)
on the continuous time axis (a zero-length interval is a single pulse at h_q).
One signal affects every agent identically. Budgets constrain the average
off/on transition rate (eta, tau_d) and the average jammed fraction of time
(kappa, T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetTooLarge, InvalidParams, NoAttacks

# Slack for budget comparisons so that budgets fitted tightly to a signal
# verify despite floating-point accumulation.
_VERIFY_SLACK = 1e-9


def n_steps(horizon: float, delta: float) -> int:
    """Number of transmission attempts in (0, horizon]; guards 10/0.1 = 99.99..."""
    return int(np.floor(horizon / delta + 1e-9))


@dataclass(frozen=True)
class DosBudget:
    """Frequency budget (eta, tau_d) and duration budget (kappa, T)."""

    eta: float
    tau_d: float
    kappa: float
    T: float

    def __post_init__(self):
        if self.eta < 0 or self.kappa < 0:
            raise InvalidParams("eta and kappa must be nonnegative")
        if not self.tau_d > 0:
            raise InvalidParams("tau_d must be positive")
        if not self.T > 1:
            raise InvalidParams("T must exceed 1")

    def dos_level(self, delta: float) -> float:
        """Combined attack level 1/T + delta/tau_d used by the consensus bounds."""
        return 1.0 / self.T + delta / self.tau_d


@dataclass(frozen=True)
class DosSignal:
    intervals: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidParams("horizon must be positive")
        ivs = tuple((float(h), float(t)) for h, t in self.intervals)
        prev_end = -np.inf
        for h, tau in ivs:
            if tau < 0:
                raise InvalidParams(f"interval at {h} has negative length")
            if h <= prev_end:
                raise InvalidParams("intervals must be sorted and disjoint")
            prev_end = h + tau
        object.__setattr__(self, "intervals", ivs)

    @property
    def starts(self) -> np.ndarray:
        return np.array([h for h, _ in self.intervals], dtype=float)

    @property
    def durations(self) -> np.ndarray:
        return np.array([t for _, t in self.intervals], dtype=float)

    def contains(self, time: float) -> bool:
        """Membership in the union of [h_q, h_q + tau_q), pulses included."""
        for h, tau in self.intervals:
            if time == h or (h <= time < h + tau):
                return True
            if h > time:
                break
        return False


EMPTY_SIGNAL_HORIZON = 1.0


def empty_signal(horizon: float = EMPTY_SIGNAL_HORIZON) -> DosSignal:
    return DosSignal(intervals=(), horizon=horizon)


def is_jammed(sig: DosSignal, k: int, delta: float) -> bool:
    """True iff the attempt at time k*delta falls in a jamming interval."""
    return sig.contains(k * delta)


def jammed_mask(sig: DosSignal, delta: float, steps: int) -> np.ndarray:
    """Vectorized is_jammed for k = 1..steps (index 0 of the result is k=1)."""
    if steps == 0:
        return np.zeros(0, dtype=bool)
    times = np.arange(1, steps + 1) * delta
    starts, durs = sig.starts, sig.durations
    if starts.size == 0:
        return np.zeros(steps, dtype=bool)
    idx = np.searchsorted(starts, times, side="right") - 1
    valid = idx >= 0
    idx_c = np.clip(idx, 0, None)
    inside = valid & (
        (times == starts[idx_c]) | (times < starts[idx_c] + durs[idx_c])
    )
    return inside


def _cumulative_measure(sig: DosSignal, points: np.ndarray) -> np.ndarray:
    """Lebesgue measure of the jammed set intersected with (-inf, p] per point."""
    starts, durs = sig.starts, sig.durations
    if starts.size == 0:
        return np.zeros(len(points))
    cum = np.concatenate([[0.0], np.cumsum(durs)])
    idx = np.searchsorted(starts, points, side="right") - 1
    idx_c = np.clip(idx, 0, None)
    partial = np.clip(points - starts[idx_c], 0.0, durs[idx_c])
    out = cum[idx_c] + partial
    out[idx < 0] = 0.0
    return out


def measure(sig: DosSignal, tau: float, t: float) -> tuple[int, float]:
    """Transition count over the closed window [tau, t] and jammed time within it."""
    if t < tau:
        raise InvalidParams("window must satisfy tau <= t")
    starts = sig.starts
    n = int(
        np.searchsorted(starts, t, side="right") - np.searchsorted(starts, tau, side="left")
    )
    lo, hi = _cumulative_measure(sig, np.array([tau, t], dtype=float))
    return n, float(hi - lo)


def verify_budget(sig: DosSignal, b: DosBudget) -> bool:
    """Check the frequency and duration constraints over every relevant window.

    Both constraints are extremal at event boundaries: the transition count
    jumps exactly at the h_q while its allowance grows linearly, and the
    jammed-time measure changes slope only at interval starts and ends. It is
    therefore sufficient to test every window whose endpoints are drawn from
    the interval starts and ends (plus the horizon), which this does with
    prefix sums in O(E^2).
    """
    starts = sig.starts
    if starts.size == 0:
        return True
    points = np.unique(np.concatenate([starts, starts + sig.durations, [sig.horizon]]))
    cnt_right = np.searchsorted(starts, points, side="right")
    cnt_left = np.searchsorted(starts, points, side="left")
    meas = _cumulative_measure(sig, points)

    span = points[None, :] - points[:, None]  # span[i, j] = t_j - tau_i
    upper = span >= 0
    n_win = cnt_right[None, :] - cnt_left[:, None]
    xi_win = meas[None, :] - meas[:, None]
    freq_ok = n_win <= b.eta + span / b.tau_d + _VERIFY_SLACK
    dur_ok = xi_win <= b.kappa + span / b.T + _VERIFY_SLACK
    return bool(np.all(freq_ok[upper]) and np.all(dur_ok[upper]))


def fit_min_budget(sig: DosSignal, tau_d: float, T: float) -> DosBudget:
    """Smallest (eta, kappa) making the given (tau_d, T) verify for this signal."""
    starts = sig.starts
    if starts.size == 0:
        return DosBudget(eta=0.0, tau_d=tau_d, kappa=0.0, T=T)
    points = np.unique(np.concatenate([starts, starts + sig.durations, [sig.horizon]]))
    cnt_right = np.searchsorted(starts, points, side="right")
    cnt_left = np.searchsorted(starts, points, side="left")
    meas = _cumulative_measure(sig, points)
    span = points[None, :] - points[:, None]
    upper = span >= 0
    n_win = cnt_right[None, :] - cnt_left[:, None]
    xi_win = meas[None, :] - meas[:, None]
    eta = float(max(0.0, np.max((n_win - span / tau_d)[upper])))
    kappa = float(max(0.0, np.max((xi_win - span / T)[upper])))
    return DosBudget(eta=eta, tau_d=tau_d, kappa=kappa, T=T)


def averaged_params(sig: DosSignal) -> tuple[float, float]:
    """Whole-horizon averages: (horizon / transition count, jammed fraction)."""
    n, xi = measure(sig, 0.0, sig.horizon)
    if n == 0:
        raise NoAttacks("signal has no off/on transitions")
    return sig.horizon / n, xi / sig.horizon


def generate_random(
    seed: int,
    horizon: float,
    delta: float,
    target_duty: float,
    mean_period: float,
) -> DosSignal:
    """Random sustained attack with exponentially distributed dwell times.

    Clean gaps draw from Exp(mean_period * (1 - target_duty)) and jamming
    intervals from Exp(mean_period * target_duty), alternating, with the first
    transition forced at or after delta and everything clipped to the horizon.
    Deterministic for a given seed.
    """
    if not (0.0 < target_duty < 1.0):
        raise InvalidParams("target_duty must lie in (0, 1)")
    if not mean_period > delta:
        raise InvalidParams("mean_period must exceed delta")
    if not (horizon > 0 and delta > 0):
        raise InvalidParams("horizon and delta must be positive")
    rng = np.random.default_rng(seed)
    mean_off = mean_period * (1.0 - target_duty)
    mean_on = mean_period * target_duty
    intervals: list[tuple[float, float]] = []
    h = max(delta, rng.exponential(mean_off))
    while h < horizon:
        tau = min(rng.exponential(mean_on), horizon - h)
        intervals.append((h, tau))
        h = h + tau + max(rng.exponential(mean_off), 1e-12)
    return DosSignal(intervals=tuple(intervals), horizon=horizon)


def success_lower_bound(k: int, delta: float, b: DosBudget) -> float:
    """Guaranteed number of successful transmissions among the first k attempts."""
    level = b.dos_level(delta)
    if level >= 1.0:
        raise BudgetTooLarge(f"1/T + delta/tau_d = {level} >= 1")
    return (1.0 - level) * k - (b.kappa + b.eta * delta) / delta


def max_consecutive_losses(sig: DosSignal, delta: float, horizon: float) -> int:
    """Longest run of consecutive jammed attempt instants on the sampling grid."""
    steps = n_steps(horizon, delta)
    mask = jammed_mask(sig, delta, steps)
    best = run = 0
    for flag in mask:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best
