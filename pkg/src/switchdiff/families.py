"""Supported initial-data families Phi(x, s).

Each family is stepwise in s (possibly uniform) with per-cell x-profiles that
are unit-mass Gaussians exp(-(x-m)^2)/sqrt(pi) or point masses delta(x-m),
so projections and Fourier transforms stay closed-form (see ``mixtures``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mixtures import GAUSSIAN_Q, GaussMix

__all__ = ["InitialData", "uniform_gaussian", "uniform_delta",
           "stepwise_gaussian", "stepwise_delta"]


@dataclass(frozen=True)
class InitialData:
    """Stepwise-in-s initial data: profiles[i] is the x-mixture on cell i."""

    name: str
    profiles: tuple          # tuple[GaussMix]

    @property
    def ncells(self) -> int:
        return len(self.profiles)

    @property
    def has_delta(self) -> bool:
        return any(p.has_delta for p in self.profiles)

    def min_width(self) -> float:
        """Smallest x-standard-deviation among atoms (0 for point masses)."""
        qmin = min(p.min_q for p in self.profiles)
        return float(np.sqrt(2.0 * qmin))

    def centers(self) -> np.ndarray:
        return np.unique(np.concatenate([p.m for p in self.profiles]))

    def refine(self, ncells: int) -> "InitialData":
        if ncells % self.ncells:
            raise ValueError("refinement must be a multiple of the cell count")
        rep = ncells // self.ncells
        return InitialData(self.name, tuple(p for p in self.profiles for _ in range(rep)))

    def total_mass(self) -> float:
        return sum(p.mass() for p in self.profiles) / self.ncells


def uniform_gaussian() -> InitialData:
    """Phi(x, s) = exp(-x^2)/sqrt(pi), the same for every s."""
    return InitialData("uniform_gaussian", (GaussMix([1.0], [0.0], [GAUSSIAN_Q]),))


def uniform_delta(center: float = 0.0) -> InitialData:
    """Phi(x, s) = delta(x - center) for every s."""
    return InitialData("uniform_delta", (GaussMix([1.0], [center], [0.0]),))


def stepwise_gaussian(means: Sequence[float]) -> InitialData:
    """Unit Gaussians with per-cell means m_i."""
    profiles = tuple(GaussMix([1.0], [m], [GAUSSIAN_Q]) for m in means)
    return InitialData("stepwise_gaussian", profiles)


def stepwise_delta(means: Sequence[float]) -> InitialData:
    """Point masses delta(x - m_i) per cell."""
    profiles = tuple(GaussMix([1.0], [m], [0.0]) for m in means)
    return InitialData("stepwise_delta", profiles)
