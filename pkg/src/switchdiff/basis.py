"""Orthonormal bases on [0,1] and projections of kernels and initial data.

Two families are provided:

* ``haar`` -- the standard orthonormal dyadic wavelet family: H_0 = 1 and
  H_n = 2^{l/2} phi(2^l s - j) for n = 2^l + j, where phi is +1 on [0, 1/2)
  and -1 on [1/2, 1).  Exact for functions that are stepwise on dyadic grids.
* ``cosine`` -- X_0 = 1, X_n(s) = sqrt(2) cos(pi n s).

Projections of stepwise kernels are computed as exact weighted cell sums
(basis integrals over cells are analytic for both families); smooth kernels
fall back to composite Gauss-Legendre quadrature.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mixtures import GaussMix
from .stepwise import StepwiseKernel

__all__ = [
    "OrthonormalBasis",
    "KernelMatrix",
    "QPropertyReport",
    "eval_basis",
    "project_kernel",
    "project_initial_data",
    "check_q_property_continuous",
]

GL_NODES_PER_PIECE = 64


@dataclass(frozen=True)
class OrthonormalBasis:
    """A truncated orthonormal system X_0..X_{N-1} on [0,1] with X_0 = 1."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("haar", "cosine"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("basis must contain at least X_0")

    def eval(self, n: int, s) -> np.ndarray:
        return eval_basis(self, n, s)

    def eval_all(self, s) -> np.ndarray:
        """Stack [X_0(s), ..., X_{N-1}(s)], shape (N,) + shape(s)."""
        return np.stack([self.eval(k, s) for k in range(self.n)])

    def cell_integrals(self, ncells: int) -> np.ndarray:
        """I[n, i] = integral of X_n over cell [i/ncells, (i+1)/ncells)."""
        edges = np.arange(ncells + 1) / ncells
        out = np.empty((self.n, ncells))
        for k in range(self.n):
            out[k] = _primitive(self, k, edges[1:]) - _primitive(self, k, edges[:-1])
        return out

    def breakpoints(self) -> np.ndarray:
        """Discontinuity locations (dyadic grid for Haar, none for cosine)."""
        if self.kind == "cosine":
            return np.array([0.0, 1.0])
        level = max(1, int(np.ceil(np.log2(max(self.n, 2)))))
        return np.arange(2 ** level + 1) / 2 ** level


def eval_basis(basis: OrthonormalBasis, n: int, s) -> np.ndarray:
    """X_n(s) with the half-open dyadic convention (s = 1 in the last piece)."""
    if not 0 <= n < basis.n:
        raise IndexError(f"basis index {n} out of range [0, {basis.n})")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("s must lie in [0, 1]")
    if n == 0:
        return np.ones_like(s)
    if basis.kind == "cosine":
        return np.sqrt(2.0) * np.cos(np.pi * n * s)
    level = int(np.floor(np.log2(n)))
    j = n - 2 ** level
    u = (2 ** level) * s - j
    # phi on [0,1), with u = 1 belonging to this wavelet only at the right edge
    last = j == 2 ** level - 1
    pos = (u >= 0) & (u < 0.5)
    neg = ((u >= 0.5) & (u < 1.0)) | (last & (u == 1.0))
    return (2 ** (level / 2.0)) * (pos.astype(float) - neg.astype(float))


def _primitive(basis: OrthonormalBasis, n: int, s) -> np.ndarray:
    """Antiderivative of X_n, used for exact cell integrals."""
    s = np.asarray(s, dtype=float)
    if n == 0:
        return s.copy()
    if basis.kind == "cosine":
        return np.sqrt(2.0) * np.sin(np.pi * n * s) / (np.pi * n)
    level = int(np.floor(np.log2(n)))
    j = n - 2 ** level
    u = np.clip((2 ** level) * s - j, 0.0, 1.0)
    tri = np.where(u < 0.5, u, 1.0 - u)          # int of phi from 0 to u
    return (2 ** (-level / 2.0)) * tri


@dataclass(frozen=True)
class KernelMatrix:
    """Fourier coefficients A[n, m] of a kernel in a given basis."""

    a: np.ndarray
    basis: OrthonormalBasis

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.basis.n, self.basis.n):
            raise ValueError("coefficient matrix must be N x N")
        object.__setattr__(self, "a", a)

    @property
    def minor(self) -> np.ndarray:
        """Rows/columns >= 1 (the block that drives the mode dynamics)."""
        return self.a[1:, 1:]

    def first_row_max(self) -> float:
        return float(np.abs(self.a[0]).max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "m", "value"])
            for n in range(self.a.shape[0]):
                for m in range(self.a.shape[1]):
                    writer.writerow([n, m, "%.17g" % self.a[n, m]])

    def reconstruct(self, s, xi) -> np.ndarray:
        """K(s, xi) = sum A_nm X_n(s) X_m(xi) on a tensor grid."""
        xs = self.basis.eval_all(s)
        xxi = self.basis.eval_all(xi)
        return np.einsum("nm,ni,mj->ij", self.a, xs, xxi)


@dataclass(frozen=True)
class QPropertyReport:
    """Diagnostics for the continuous q-property (diagonal < 0, zero s-integrals)."""

    worst_diagonal: float          # max K(s,s) over samples; must be < 0
    worst_column_integral: float   # max |int K(s, xi) ds| over sampled xi
    diagonal_location: float
    column_location: float
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.worst_diagonal < 0 and self.worst_column_integral <= self.tol

    def summary(self) -> str:
        return (f"q-property: max diag {self.worst_diagonal:.3e} at s={self.diagonal_location:.4f}; "
                f"max |col integral| {self.worst_column_integral:.3e} at xi={self.column_location:.4f}; "
                f"{'pass' if self.passed else 'FAIL'}")


class QPropertyError(ValueError):
    pass


def check_q_property_continuous(kernel, samples: int = 257,
                                breakpoints: Sequence[float] | None = None) -> QPropertyReport:
    """Verify K(s,s) < 0 and int_0^1 K(s, xi) ds = 0 on a sample grid.

    ``breakpoints`` mark discontinuities of callable kernels so the s-integral
    quadrature stays exact piecewise; stepwise kernels are summed exactly.
    """
    if isinstance(kernel, StepwiseKernel):
        g = kernel.grid
        diag = np.diag(g)
        jd = int(np.argmax(diag))
        col = g.sum(axis=0) / g.shape[0]     # exact cell integrals over s
        jc = int(np.argmax(np.abs(col)))
        mid = (np.arange(g.shape[0]) + 0.5) / g.shape[0]
        return QPropertyReport(float(diag.max()), float(np.abs(col).max()),
                               float(mid[jd]), float(mid[jc]))
    ss = np.linspace(0.0, 1.0, samples)
    diag = np.array([kernel(s, s) for s in ss], dtype=float)
    jd = int(np.argmax(diag))
    edges = np.asarray(sorted({0.0, 1.0, *map(float, breakpoints or ())}))
    nodes, weights = _composite_gl(edges)
    cols = np.array([float(np.dot(weights, [kernel(s, xi) for s in nodes])) for xi in ss])
    jc = int(np.argmax(np.abs(cols)))
    return QPropertyReport(float(diag.max()), float(np.abs(cols).max()),
                           float(ss[jd]), float(ss[jc]))


def _composite_gl(edges: np.ndarray, nodes_per_piece: int = GL_NODES_PER_PIECE):
    """Composite Gauss-Legendre nodes/weights over consecutive intervals."""
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_piece)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * xg + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def project_kernel(kernel, basis: OrthonormalBasis,
                   breakpoints: Sequence[float] | None = None,
                   check_q: bool = True) -> KernelMatrix:
    """A_nm = int int K(s, xi) X_n(s) X_m(xi) ds dxi.

    Stepwise kernels are projected exactly through analytic cell integrals of
    the basis functions; callables use composite Gauss-Legendre over the
    smooth pieces (basis breakpoints joined with any supplied kernel
    breakpoints), cross-checked at two resolutions.
    """
    if check_q:
        report = check_q_property_continuous(kernel, breakpoints=breakpoints)
        if not report.passed:
            raise QPropertyError(report.summary())

    if isinstance(kernel, StepwiseKernel):
        cells = basis.cell_integrals(kernel.ncells)   # I[n, cell]
        a = cells @ kernel.grid @ cells.T
    else:
        edges = np.asarray(sorted(set(np.concatenate([
            basis.breakpoints(),
            np.asarray(breakpoints if breakpoints is not None else [0.0, 1.0], dtype=float),
        ]))))
        a = _project_quadrature(kernel, basis, edges, GL_NODES_PER_PIECE)
        a_hi = _project_quadrature(kernel, basis, edges, GL_NODES_PER_PIECE + 16)
        if np.abs(a - a_hi).max() > 1e-10:
            raise RuntimeError("kernel projection quadrature did not converge")
    if isinstance(kernel, StepwiseKernel):
        tol = 64 * np.finfo(float).eps * max(1.0, float(np.abs(kernel.grid).max()))
    else:
        tol = 1e-10
    first_row = float(np.abs(a[0]).max())
    if first_row > tol:
        raise QPropertyError(f"A[0, :] not zero (max {first_row:.3e}); "
                             "kernel violates the zero-integral q-property")
    # zero in exact arithmetic (q-property (ii) against X_0 = 1); enforce so the
    # zeroth mode stays frozen to the last bit
    a[0, :] = 0.0
    return KernelMatrix(a, basis)


def _project_quadrature(kernel, basis, edges, npiece):
    nodes, weights = _composite_gl(edges, npiece)
    xvals = basis.eval_all(nodes)                # (N, nq)
    kmat = np.array([[kernel(s, xi) for xi in nodes] for s in nodes])
    return (xvals * weights) @ kmat @ (xvals * weights).T


def project_initial_data(profiles: Sequence[GaussMix], basis: OrthonormalBasis) -> list[GaussMix]:
    """Project stepwise-in-s initial data onto the basis.

    ``profiles`` holds the per-cell x-profiles (Gaussian/delta mixtures) of
    Phi(x, s) on uniform cells; the result is the list of coefficient
    functions g_k(x) = int Phi(x, s) X_k(s) ds, again as symbolic mixtures.
    """
    ncells = len(profiles)
    weights = basis.cell_integrals(ncells)       # (N, ncells)
    out = []
    for k in range(basis.n):
        mix = GaussMix()
        for i, prof in enumerate(profiles):
            if weights[k, i] != 0.0:
                mix = mix + weights[k, i] * prof
        out.append(mix.compact(tol=0.0))
    return out
