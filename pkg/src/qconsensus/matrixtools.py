"""Dense matrix utilities: spectral radius, induced norms, power-growth constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BaseNotDominating, CapReached, NonSquare

DEFAULT_K_CAP = 100_000
# Consecutive non-improving steps required before the supremum search stops
# when the decay base equals the spectral radius. The ratio sequence can keep
# creeping up for a few hundred steps (argmax beyond 300 occurs for the
# composite observer matrices), so the window must be comfortably larger.
PLATEAU_WINDOW = 600


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus, general (nonsymmetric) eigensolver."""
    m = _square(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def induced_inf_norm(m: np.ndarray) -> float:
    """Maximum absolute row sum."""
    m = np.asarray(m, dtype=float)
    return float(np.abs(m).sum(axis=1).max())


def induced_2norm(m: np.ndarray) -> float:
    """Spectral norm, sqrt of the largest eigenvalue of m^T m."""
    return float(np.linalg.norm(np.asarray(m, dtype=float), 2))


@dataclass(frozen=True)
class GrowthConstant:
    """Smallest observed C with ||M^k|| <= C * rho_bar^k over the explored ks."""

    constant: float
    argmax_k: int
    rho_bar: float


def growth_constant(
    m: np.ndarray, rho_bar: float | None = None, k_cap: int = DEFAULT_K_CAP
) -> GrowthConstant:
    """Supremum of ||M^k||_2 / rho_bar^k over k >= 0.

    Two stopping rules, whichever fires first:

    * Once the ratio falls to 1 or below at some step k, submultiplicativity
      closes the search exactly: any m > k splits as m = a*k + r with r < k,
      so ratio(m) <= ratio(k)^a * ratio(r) never exceeds the running maximum.
      This always fires for a strictly dominating base.
    * Once the running maximum has not improved for PLATEAU_WINDOW consecutive
      steps the scan stops. This covers rho_bar equal to the spectral radius
      (the default, and the form the consensus conditions need), where the
      ratio settles onto a finite plateau for any diagonalizable matrix.

    Raises BaseNotDominating when rho_bar falls below the spectral radius, and
    CapReached when neither rule fires within k_cap steps or the ratio exceeds
    1e12 (symptoms of a defective or near-defective matrix, for which the
    equal-base supremum does not exist). Callers may retry with a larger k_cap
    or a strictly dominating base.
    """
    m = _square(m)
    if k_cap < 1:
        raise ValueError("k_cap must be >= 1")
    rho = spectral_radius(m)
    if rho_bar is None:
        rho_bar = rho
    if rho == 0.0:
        # Nilpotent or zero: any positive base dominates eventually; a zero
        # base only works for the zero matrix.
        if rho_bar > 0.0 or not m.any():
            return GrowthConstant(constant=1.0, argmax_k=0, rho_bar=float(rho_bar))
        raise BaseNotDominating("zero base with a nonzero nilpotent matrix")
    if rho_bar < rho * (1.0 - 1e-9):
        raise BaseNotDominating(f"rho_bar={rho_bar} < spectral radius {rho}")

    scaled = m / rho_bar
    power = np.eye(m.shape[0])
    best, best_k = 1.0, 0
    no_improve = 0
    for k in range(1, k_cap + 1):
        power = power @ scaled
        ratio = float(np.linalg.norm(power, 2))
        if ratio > 1e12:
            raise CapReached(f"power ratio exceeded 1e12 at k={k}")
        # only a material improvement restarts the plateau countdown; a ratio
        # creeping up toward its limit must not stall the scan forever
        if ratio > best * (1.0 + 1e-12):
            no_improve = 0
        else:
            no_improve += 1
        if ratio > best:
            best, best_k = ratio, k
        if ratio <= 1.0 or no_improve >= PLATEAU_WINDOW:
            return GrowthConstant(constant=best, argmax_k=best_k, rho_bar=float(rho_bar))
    raise CapReached(f"no settling observed within k_cap={k_cap}")
