"""Gaussian/delta mixtures closed under the solver's Fourier-space operations.

Initial data, transformed data and evolved mode coefficients are all kept
symbolic as real-weighted sums of atoms

    w * exp(-q mu^2 - i m mu),   q >= 0,

i.e. the Fourier transforms (convention  f_hat(mu) = int f(x) e^{-i mu x} dx)
of Gaussians and point masses:

    exp(-(x-m)^2 / (4 q)) / sqrt(4 pi q)   <->   (w=1, m, q)      (q > 0)
    delta(x - m)                           <->   (w=1, m, q=0)

The scheme's operations stay inside this family: argument scaling
g(mu) -> g(alpha mu) maps (w, m, q) -> (w, alpha m, alpha^2 q); multiplying by
a Gaussian weight exp(-f mu^2 - i g mu) shifts (m, q) -> (m + g, q + f);
linear combination concatenates atoms.  The inverse transform is therefore
evaluated without quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GaussMix", "gaussian_atom", "delta_atom"]

# variance of the unit-mass Gaussian exp(-(x-m)^2)/sqrt(pi) is 1/2 -> q = 1/4
GAUSSIAN_Q = 0.25


@dataclass(frozen=True)
class GaussMix:
    """A finite mixture sum_j w_j exp(-q_j mu^2 - i m_j mu) in Fourier space."""

    w: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    q: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if not (w.shape == m.shape == q.shape):
            raise ValueError("w, m, q must have identical shapes")
        if np.any(q < 0):
            raise ValueError("atom widths q must be nonnegative")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", q)

    # ---- algebra ----------------------------------------------------------
    def __add__(self, other: "GaussMix") -> "GaussMix":
        return GaussMix(np.concatenate([self.w, other.w]),
                        np.concatenate([self.m, other.m]),
                        np.concatenate([self.q, other.q]))

    def __mul__(self, a: float) -> "GaussMix":
        return GaussMix(self.w * a, self.m, self.q)

    __rmul__ = __mul__

    def scale_argument(self, alpha: float) -> "GaussMix":
        """Return the mixture representing mu -> g(alpha * mu)."""
        return GaussMix(self.w, self.m * alpha, self.q * alpha * alpha)

    def gauss_weight(self, f: float, g: float) -> "GaussMix":
        """Multiply by exp(-f mu^2 - i g mu); f may not push any q below 0."""
        return GaussMix(self.w, self.m + g, self.q + f)

    def compact(self, tol: float = 0.0) -> "GaussMix":
        """Merge atoms with identical (m, q); drop |w| <= tol."""
        key = {}
        for w, m, q in zip(self.w, self.m, self.q):
            key[(m, q)] = key.get((m, q), 0.0) + w
        items = [(m, q, w) for (m, q), w in key.items() if abs(w) > tol]
        if not items:
            return GaussMix(np.zeros(0), np.zeros(0), np.zeros(0))
        m, q, w = zip(*[(m, q, w) for m, q, w in items])
        return GaussMix(np.array(w), np.array(m), np.array(q))

    # ---- evaluation -------------------------------------------------------
    @property
    def n_atoms(self) -> int:
        return self.w.size

    @property
    def has_delta(self) -> bool:
        return bool(np.any(self.q == 0.0))

    @property
    def min_q(self) -> float:
        return float(self.q.min()) if self.q.size else np.inf

    def mass(self) -> float:
        """Total integral of the x-space function (= value at mu = 0)."""
        return float(self.w.sum())

    def ft(self, mu) -> np.ndarray:
        """Evaluate sum_j w_j exp(-q_j mu^2 - i m_j mu) at mu (vectorized)."""
        mu = np.asarray(mu, dtype=float)
        out = np.zeros(mu.shape, dtype=complex)
        for w, m, q in zip(self.w, self.m, self.q):
            out += w * np.exp(-q * mu * mu - 1j * m * mu)
        return out

    def density(self, x) -> np.ndarray:
        """Inverse Fourier transform on a real grid; requires all q > 0."""
        if self.has_delta:
            raise ValueError("mixture contains point masses; density undefined on a grid")
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, m, q in zip(self.w, self.m, self.q):
            out += w * np.exp(-((x - m) ** 2) / (4.0 * q)) / np.sqrt(4.0 * np.pi * q)
        return out
