"""Finite-level uniform quantizer with saturation detection.

A quantizer with 2R+1 output levels {0, +-2*sigma, ..., +-2*R*sigma}. Inputs
inside the band ((2z-1)*sigma, (2z+1)*sigma) map to 2*z*sigma; inputs beyond
(2R+1)*sigma clamp to the outermost level and raise the saturation flag.
Within range the error never exceeds sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NonFinite, NotRepresentable


@dataclass(frozen=True)
class QuantizerParams:
    levels_R: int
    step_sigma: float

    def __post_init__(self):
        if self.levels_R < 1 or int(self.levels_R) != self.levels_R:
            raise InvalidParams("levels_R must be a positive integer")
        if not (self.step_sigma > 0) or not np.isfinite(self.step_sigma):
            raise InvalidParams("step_sigma must be positive and finite")

    @property
    def input_range(self) -> float:
        """Largest input magnitude the quantizer handles without overflow."""
        return (2 * self.levels_R + 1) * self.step_sigma


@dataclass(frozen=True)
class QuantResult:
    value: float
    saturated: bool


def quantize_array(chi: np.ndarray, p: QuantizerParams) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise quantization; returns (values, per-component saturation mask)."""
    chi = np.asarray(chi, dtype=float)
    if not np.all(np.isfinite(chi)):
        raise NonFinite("quantizer input must be finite")
    sigma, r = p.step_sigma, p.levels_R
    mag = np.abs(chi)
    # Band index: magnitudes in [(2z-1)s, (2z+1)s) get z, sub-sigma inputs get 0.
    z = np.floor((mag / sigma + 1.0) / 2.0)
    saturated = mag > (2 * r + 1) * sigma
    z = np.minimum(z, float(r))
    values = np.sign(chi) * 2.0 * z * sigma
    return values, saturated


def quantize_scalar(chi: float, p: QuantizerParams) -> QuantResult:
    values, saturated = quantize_array(np.array([chi]), p)
    return QuantResult(value=float(values[0]), saturated=bool(saturated[0]))


def quantize_vector(beta: np.ndarray, p: QuantizerParams) -> tuple[np.ndarray, bool]:
    """Vector quantization; the flag is the OR of the component flags."""
    values, saturated = quantize_array(beta, p)
    return values, bool(saturated.any())


def symbol_index(value: float, p: QuantizerParams) -> int:
    """Map a representable output back to its transmitted symbol z in [-R, R]."""
    scaled = value / (2.0 * p.step_sigma)
    z = round(scaled)
    if abs(scaled - z) > 1e-9 or abs(z) > p.levels_R:
        raise NotRepresentable(f"{value} is not an output of this quantizer")
    return int(z)


def symbol_indices(values: np.ndarray, p: QuantizerParams) -> np.ndarray:
    scaled = np.asarray(values, dtype=float) / (2.0 * p.step_sigma)
    z = np.rint(scaled)
    if np.any(np.abs(scaled - z) > 1e-9) or np.any(np.abs(z) > p.levels_R):
        raise NotRepresentable("array contains non-representable values")
    return z.astype(np.int64)
