"""Uniform proper-time grids shared by curve, Hamiltonian and transfer integrators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """steps+1 samples at tau_i = i * h, starting from zero."""

    h: float
    steps: int

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"grid step must be positive, got {self.h}")
        if self.steps < 0:
            raise ValueError(f"step count must be non-negative, got {self.steps}")

    @classmethod
    def from_range(cls, h: float, tau_max: float) -> "Grid":
        if h <= 0 or tau_max <= 0:
            raise ValueError(f"need h > 0 and tau_max > 0, got h={h}, tau_max={tau_max}")
        return cls(h, int(round(tau_max / h)))

    @property
    def taus(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.h

    @property
    def tau_max(self) -> float:
        return self.steps * self.h

    def __len__(self) -> int:
        return self.steps + 1


def interp_matrix_samples(taus: np.ndarray, samples: np.ndarray):
    """Linear interpolation through matrix samples on a uniform grid.

    Returns a callable tau -> matrix; queries are clamped to the sampled
    range so integrator stages at tau_max + rounding never extrapolate.
    """
    taus = np.asarray(taus, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if len(taus) != len(samples):
        raise ValueError(f"{len(taus)} grid points vs {len(samples)} samples")
    if len(taus) == 1:
        fixed = samples[0]
        return lambda tau: fixed
    h = taus[1] - taus[0]

    def at(tau: float) -> np.ndarray:
        s = (tau - taus[0]) / h
        i = int(np.floor(s))
        if i < 0:
            return samples[0]
        if i >= len(taus) - 1:
            return samples[-1]
        w = s - i
        return (1.0 - w) * samples[i] + w * samples[i + 1]

    return at
