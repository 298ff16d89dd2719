"""Explicit solution families, sandwich bounds and steady states.

All evaluators are direct Gaussian expressions (no quadrature) for the
spectral construction's output; they are cross-checked against the generic
mixture pipeline in the test suite.  Haar is the default basis (exact for the
stepwise families); a cosine variant of the stepwise-Gaussian case is kept
for comparison and warns that the two-mode truncation is not exact there.

Conventions and corrections (see README, "deviations from the printed
formulas"):

* mode ratios A10/A11 are always computed from the projected kernel matrix,
  never hard-coded;
* the advected branch uses the Ornstein-Uhlenbeck-correct transport: initial
  centers decay as m e^{bt} and the initial variance as e^{2bt}, so the
  b < 0 Gaussian case is explicit and the long-time peaks sit at -c/b;
* the published envelope functions J1/J2 remain valid pointwise bounds for
  the advected mixing amplitude whenever |b| <= 1 and are returned by the
  bound operations;
* the four-state solution uses exp(A_minor t); the published trigonometric
  B2/B3 contain growing exponentials (misprint) and are provided only as a
  documented cross-check (`four_state_printed_modes`).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import KernelMatrix, OrthonormalBasis, project_kernel
from .model import ContinuousModel, DiscreteModel, discrete_to_continuous
from .spectral import expm_modes, strip_weight
from .stepwise import StepwiseFunction, StepwiseKernel

__all__ = [
    "TwoStateParams",
    "FourStateParams",
    "uniform_gaussian_b0",
    "uniform_gaussian_bnz",
    "uniform_gaussian_bneg_bounds",
    "delta_bneg",
    "stepwise_gaussian_b0",
    "stepwise_delta_bneg",
    "steady_state_bounds",
    "four_state_A",
    "four_state_solution",
    "four_state_printed_modes",
    "export_bounds_csv",
]


@dataclass(frozen=True)
class TwoStateParams:
    """Two-state switching diffusion with linear drift b(s) x + c."""

    l1: float
    l2: float
    r1: float
    r2: float
    b1: float = 0.0
    b2: float = 0.0
    c: float = 0.0
    m1: float = 0.0
    m2: float = 0.0

    def __post_init__(self):
        if min(self.l1, self.l2) <= 0:
            raise ValueError("switching rates must be positive")
        if min(self.r1, self.r2) <= 0:
            raise ValueError("diffusions must be positive")

    def discrete(self) -> DiscreteModel:
        return DiscreteModel(q=[[-self.l1, self.l1], [self.l2, -self.l2]],
                             b=[self.b1, self.b2], c=[self.c, self.c],
                             sigma=[self.r1, self.r2])

    def model(self) -> ContinuousModel:
        return discrete_to_continuous(self.discrete())

    def mode_matrix(self, basis: OrthonormalBasis | None = None) -> KernelMatrix:
        basis = basis or OrthonormalBasis("haar", 2)
        return project_kernel(self.model().kernel, basis)

    def state(self, s: float) -> int:
        return 0 if s < 0.5 else 1

    def at(self, s: float):
        j = self.state(s)
        return ((self.b1, self.b2)[j], self.c, (self.r1, self.r2)[j],
                (self.m1, self.m2)[j])


@dataclass(frozen=True)
class FourStateParams:
    """Level-2 multifractal volatility model: variances r0^2 .. (2-r0)^2."""

    l1: float
    l2: float
    r0: float
    m0: float
    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        if not 0 < self.r0 < 2:
            raise ValueError("r0 must lie in (0, 2)")
        if min(self.l1, self.l2) <= 0:
            raise ValueError("switching rates must be positive")

    def r2_values(self) -> np.ndarray:
        r0 = self.r0
        return np.array([r0 * r0, r0 * (2 - r0), r0 * (2 - r0), (2 - r0) ** 2])

    def means(self) -> np.ndarray:
        return np.array([self.m0, self.m1, self.m2, self.m3])

    def kernel_grid(self) -> np.ndarray:
        l1, l2 = self.l1, self.l2
        lam = l1 + l2
        return np.array([
            [-lam, l1, l2, 0.0],
            [l2, -lam, 0.0, l1],
            [l1, 0.0, -lam, l2],
            [0.0, l2, l1, -lam]])

    def model(self) -> ContinuousModel:
        return ContinuousModel(kernel=StepwiseKernel(self.kernel_grid()),
                               b=StepwiseFunction(np.zeros(4)),
                               c=StepwiseFunction(np.zeros(4)),
                               r=StepwiseFunction(np.sqrt(self.r2_values())))


def _x1(s: float) -> float:
    return 1.0 if s < 0.5 else -1.0


def _ratio(p: TwoStateParams):
    a = p.mode_matrix().a
    return a[1, 0], a[1, 1]


def _mix_amplitude(a10: float, a11: float, t: float) -> float:
    """r(t) = (A10/A11)(e^{A11 t} - 1)."""
    return (a10 / a11) * np.expm1(a11 * t)


def uniform_gaussian_b0(p: TwoStateParams, t: float, x, s: float) -> np.ndarray:
    """Uniform Gaussian data, b = 0: amplitude-weighted spreading Gaussian."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    _, c, r, _ = p.at(s)
    a10, a11 = _ratio(p)
    amp = 1.0 + _mix_amplitude(a10, a11, t) * _x1(s)
    den = 1.0 + 2.0 * r * r * t
    return amp * np.exp(-((x - c * t) ** 2) / den) / np.sqrt(np.pi * den)


def _bneg_pieces(p: TwoStateParams, t: float, s: float):
    b, c, r, _ = p.at(s)
    if b >= 0:
        raise ValueError("operation requires b(s) < 0 on the strip containing s")
    d = (r * r / b) * np.expm1(2.0 * b * t)        # = 4 f(t) > 0
    g = (c / b) * np.expm1(b * t)                  # drifting center, -> -c/b
    return b, c, r, d, g


def uniform_gaussian_bnz(p: TwoStateParams, t: float, x, s: float) -> np.ndarray:
    """Uniform Gaussian data, b != 0: explicit under the corrected transport.

    Variance (1/2) e^{2bt} - (R^2/2b)(1 - e^{2bt}), center (c/b)(e^{bt} - 1):
    the exact OU moment evolution from initial variance 1/2.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    b, c, r, _ = p.at(s)
    if b == 0:
        return uniform_gaussian_b0(p, t, x, s)
    f, g = strip_weight(b, c, r, t)
    a10, a11 = _ratio(p)
    amp = 1.0 + _mix_amplitude(a10, a11, t) * _x1(s)
    var4 = 4.0 * f + np.exp(2.0 * b * t)
    return amp * np.exp(-((x - g) ** 2) / var4) / np.sqrt(np.pi * var4)


def uniform_gaussian_bneg_bounds(p: TwoStateParams, t: float, x, s: float):
    """(lower, upper) envelopes for the uniform-Gaussian b < 0 density.

    The mixing amplitude is B0 + r(t) X1(s) Q with Q between the published
    envelopes J1/sqrt(pi) and J2/sqrt(pi) (sigma = -1); lower <= upper by
    construction (min/max over both assignments).
    """
    x = np.asarray(x, dtype=float)
    b, c, r, d, g = _bneg_pieces(p, t, s)
    a10, a11 = _ratio(p)
    rt = _mix_amplitude(a10, a11, t)
    xc = x - g                                      # = x + (c/b)(1 - e^{bt})
    w0 = np.exp(2.0 * b * t)
    b0 = np.exp(-xc ** 2 / (d + w0)) / np.sqrt(np.pi * (d + w0))
    sig = -1.0
    j1 = np.exp(-xc ** 2 / (d + np.exp(2 * sig * t))) / np.sqrt(d + 1.0)
    j2 = np.exp(-xc ** 2 / (d + 1.0)) / np.sqrt(d + np.exp(2 * sig * t))
    cands = np.stack([b0 + rt * _x1(s) * j1 / np.sqrt(np.pi),
                      b0 + rt * _x1(s) * j2 / np.sqrt(np.pi)])
    return cands.min(axis=0), cands.max(axis=0)


def delta_bneg(p: TwoStateParams, t: float, x, s: float, center: float = 0.0) -> np.ndarray:
    """Uniform point-mass data delta(x - center), b < 0: explicit density.

    Exponent denominator -(R^2/b)(1 - e^{2bt}) -> -R^2/b; peak drifts to -c/b.
    """
    if t <= 0:
        raise ValueError("delta data is not representable on a grid at t = 0")
    x = np.asarray(x, dtype=float)
    b, c, r, d, g = _bneg_pieces(p, t, s)
    a10, a11 = _ratio(p)
    amp = 1.0 + _mix_amplitude(a10, a11, t) * _x1(s)
    mu = center * np.exp(b * t) + g
    return amp * np.exp(-((x - mu) ** 2) / d) / np.sqrt(np.pi * d)


def stepwise_gaussian_b0(p: TwoStateParams, t: float, x, s: float,
                         basis: str = "haar") -> np.ndarray:
    """Stepwise Gaussian data (means m1, m2), b = 0.

    Haar reproduces the data exactly at t = 0; the cosine variant is a genuine
    two-mode truncation and warns accordingly.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    _, c, r, _ = p.at(s)
    den = 1.0 + 2.0 * r * r * t
    g1x = np.exp(-((x - p.m1 - c * t) ** 2) / den) / np.sqrt(np.pi * den)
    g2x = np.exp(-((x - p.m2 - c * t) ** 2) / den) / np.sqrt(np.pi * den)
    if basis == "haar":
        b0, b1 = 0.5 * (g1x + g2x), 0.5 * (g1x - g2x)
        a10, a11 = _ratio(p)
        x1 = _x1(s)
    elif basis == "cosine":
        warnings.warn("cosine two-mode truncation is not exact for stepwise data",
                      stacklevel=2)
        b0 = 0.5 * (g1x + g2x)
        b1 = (np.sqrt(2.0) / np.pi) * (g1x - g2x)
        km = p.mode_matrix(OrthonormalBasis("cosine", 2))
        a10, a11 = km.a[1, 0], km.a[1, 1]
        x1 = np.sqrt(2.0) * np.cos(np.pi * s)
    else:
        raise ValueError("basis must be 'haar' or 'cosine'")
    return b0 + (np.exp(a11 * t) * b1 + _mix_amplitude(a10, a11, t) * b0) * x1


def stepwise_delta_bneg(p: TwoStateParams, t: float, x, s: float) -> np.ndarray:
    """Stepwise point-mass data delta(x - m(s)), b < 0 (Haar, exact scheme form)."""
    if t <= 0:
        raise ValueError("delta data is not representable on a grid at t = 0")
    x = np.asarray(x, dtype=float)
    b, c, r, d, g = _bneg_pieces(p, t, s)
    eb = np.exp(b * t)
    g1x = np.exp(-((x - p.m1 * eb - g) ** 2) / d) / np.sqrt(np.pi * d)
    g2x = np.exp(-((x - p.m2 * eb - g) ** 2) / d) / np.sqrt(np.pi * d)
    b0, b1 = 0.5 * (g1x + g2x), 0.5 * (g1x - g2x)
    a10, a11 = _ratio(p)
    return b0 + (np.exp(a11 * t) * b1 + _mix_amplitude(a10, a11, t) * b0) * _x1(s)


def steady_state_bounds(p: TwoStateParams, x, s: float):
    """(lower, upper) for the t -> infinity profile, b < 0.

    Built from B0* and the published envelope limits Q-*, Q+*; the branch
    ordering follows sign(A10) through the min/max construction, and the
    bounds collapse to B0* when the switching rates coincide (A10 = 0).
    """
    x = np.asarray(x, dtype=float)
    b, c, r, _ = p.at(s)
    if b >= 0:
        raise ValueError("steady state requires b(s) < 0")
    dinf = -r * r / b
    xc = x + c / b
    b0 = np.exp(-xc ** 2 / dinf) / np.sqrt(np.pi * dinf)
    qm = np.exp(-xc ** 2 / dinf) / np.sqrt(np.pi * (dinf + 1.0))
    qp = np.exp(-xc ** 2 / (dinf + 1.0)) / np.sqrt(np.pi * dinf)
    a10, a11 = _ratio(p)
    rinf = -a10 / a11 * _x1(s)
    cands = np.stack([b0 + rinf * qm, b0 + rinf * qp])
    return cands.min(axis=0), cands.max(axis=0)


def export_bounds_csv(p: TwoStateParams, times, x, s_samples, path) -> None:
    """Write the envelope CSV: header t,x,s,lower,upper, 17-digit rendering."""
    fmt = "%.17g"
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = np.asarray(x, dtype=float)
    s_samples = np.atleast_1d(np.asarray(s_samples, dtype=float))
    with open(path, "w", newline="\n") as fh:
        fh.write("t,x,s,lower,upper\n")
        for t in times:
            for s in s_samples:
                lo, up = uniform_gaussian_bneg_bounds(p, float(t), x, float(s))
                for ix, xv in enumerate(x):
                    fh.write(f"{fmt % t},{fmt % xv},{fmt % s},"
                             f"{fmt % lo[ix]},{fmt % up[ix]}\n")


# ---- four hidden-state hierarchy ------------------------------------------

def four_state_A(l1: float, l2: float) -> np.ndarray:
    """Haar N=4 coefficient matrix of the four-state kernel (exact cell sums).

    Note: the published matrix misprints the (3,1) entry as (l1-l2)/2; the
    projection gives sqrt(2)/8 (l1-l2), and the minor's eigenvalues are
    -(l1+l2)/2 and -(l1+l2)/4 +- i (l1-l2)/4.
    """
    p = FourStateParams(l1, l2, 1.0, 0, 0, 0, 0)
    return project_kernel(StepwiseKernel(p.kernel_grid()),
                          OrthonormalBasis("haar", 4)).a


def four_state_solution(p: FourStateParams, t: float, x, s: float) -> np.ndarray:
    """Density of the four-state model (b = c = 0) via exp(A_minor t).

    p(t,x,s) = sum_l X_l(s) B_l with B_l = sum_k E_lk [g_k heat-evolved at
    R(s)]; Gaussian algebra only.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    basis = OrthonormalBasis("haar", 4)
    a = four_state_A(p.l1, p.l2)
    e = expm_modes(a, t)
    cellint = basis.cell_integrals(4)             # C[k, i]
    r2 = p.r2_values()
    j = min(int(s * 4), 3)
    den = 1.0 + 2.0 * r2[j] * t
    gs = np.stack([np.exp(-((x - m) ** 2) / den) / np.sqrt(np.pi * den)
                   for m in p.means()])           # (4, nx)
    xl = basis.eval_all(np.asarray(s, dtype=float))   # (4,)
    weights = xl @ e @ cellint                    # combine modes back to cell i
    return weights @ gs


def four_state_printed_modes(p: FourStateParams, t: float, x, s: float):
    """The published trigonometric B_1..B_3 (documented cross-check only).

    B_1 matches the matrix-exponential route; the published B_2 and B_3
    contain growing exponentials e^{+(l1+l2)t/2} and disagree with both the
    matrix exponential and the stated decay of all states.  Returned as
    (B1, B2, B3) for comparison purposes.
    """
    x = np.asarray(x, dtype=float)
    lam, dl = p.l1 + p.l2, p.l2 - p.l1
    r2 = p.r2_values()
    j = min(int(s * 4), 3)
    den = 1.0 + 2.0 * r2[j] * t
    g = [np.exp(-((x - m) ** 2) / den) / np.sqrt(np.pi * den) for m in p.means()]
    alpha1 = 0.25 * (g[0] + g[1] - g[2] - g[3])
    alpha2 = (np.sqrt(2) / 4) * (g[0] - g[1])
    alpha3 = (np.sqrt(2) / 4) * (g[2] - g[3])
    cos, sin = np.cos(dl * t / 4.0), np.sin(dl * t / 4.0)
    decay, grow4, grow2 = np.exp(-lam * t / 4.0), np.exp(lam * t / 4.0), np.exp(lam * t / 2.0)
    b1 = (np.sqrt(2) / 2) * decay * (np.sqrt(2) * alpha1 * cos + (alpha2 + alpha3) * sin)
    # B2/B3 as printed, growing exponentials included verbatim
    b2 = (0.5 * (alpha2 - alpha3) * grow2 - 0.5 * alpha1 * grow4 * sin
          + 0.5 * (alpha2 - alpha3) * grow4 * cos)
    b3 = (-0.5 * (alpha2 - alpha3) * grow2 - 0.5 * alpha1 * grow4 * sin
          + 0.5 * (alpha2 - alpha3) * grow4 * cos)
    return b1, b2, b3
