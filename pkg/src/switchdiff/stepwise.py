"""Piecewise-constant functions and kernels on uniform cells of [0,1].

Cells are half-open, [i/M, (i+1)/M) for i < M-1, with s = 1 assigned to the
last cell.  These are the carriers of the discrete-model embedding: state i
lives on cell i.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["StepwiseFunction", "StepwiseKernel", "cell_index", "cell_midpoints"]


def cell_index(s, ncells: int) -> np.ndarray:
    """Cell index of s in [0,1]; right endpoint goes to the last cell."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("s must lie in [0, 1]")
    return np.minimum((s * ncells).astype(int), ncells - 1)


def cell_midpoints(ncells: int) -> np.ndarray:
    return (np.arange(ncells) + 0.5) / ncells


@dataclass(frozen=True)
class StepwiseFunction:
    """f(s) = values[i] on cell i."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def ncells(self) -> int:
        return self.values.size

    def __call__(self, s) -> np.ndarray:
        return self.values[cell_index(s, self.ncells)]

    def refine(self, ncells: int) -> "StepwiseFunction":
        """Re-express on a finer uniform grid (ncells must be a multiple)."""
        if ncells % self.ncells:
            raise ValueError("refinement must be a multiple of the cell count")
        return StepwiseFunction(np.repeat(self.values, ncells // self.ncells))


@dataclass(frozen=True)
class StepwiseKernel:
    """K(s, xi) = grid[j, i] for s in cell j, xi in cell i."""

    grid: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("kernel grid must be square")
        object.__setattr__(self, "grid", g)

    @property
    def ncells(self) -> int:
        return self.grid.shape[0]

    def __call__(self, s, xi) -> np.ndarray:
        j = cell_index(s, self.ncells)
        i = cell_index(xi, self.ncells)
        return self.grid[j, i]
