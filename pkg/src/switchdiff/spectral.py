"""Constructive spectral solution: Fourier transform in x, Galerkin modes in s.

Pipeline (per strip of constant-coefficient s):

1. ``forward_transform`` -- initial data to closed-form mode transforms
   ghat_k(mu) (Gaussian/delta mixtures).
2. ``evolve_modes_b0`` / ``evolve_modes_bnz`` -- the projected mode system

       d a_k / dt = sum_l A_kl a_l            (b = 0)
       d a_k / dt = sum_l A_kl a_l + b mu d a_k / d mu    (b != 0)

   solved by a matrix exponential (scaling-and-squaring Pade); the advection
   part is handled by characteristics, which are straight exponentials
   mu(eta) = mu0 e^{-b eta}, so a(t, mu) = exp(A t) ghat(mu e^{b t}).
   The zeroth mode is frozen exactly (first row of A vanishes).
3. ``reassemble`` -- multiply by the strip weight exp(-f(t) mu^2 - i g(t) mu),

       f = (R^2 / 4b)(e^{2bt} - 1)  ->  R^2 t / 2   as b -> 0,
       g = (c / b)(e^{bt} - 1)      ->  c t,

   and invert the Fourier transform, either in closed form (Gaussian
   algebra) or by trapezoidal quadrature on a mu-grid.

Note the characteristic direction: the published variant of step 2 runs the
transport map backwards (foot mu e^{-sign(b) t}), which contradicts the exact
Ornstein-Uhlenbeck transition law (mean m e^{bt}, initial variance decaying
as e^{2bt}); the foot used here is mu e^{bt}.  See README, "deviations".
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .basis import KernelMatrix, OrthonormalBasis, project_initial_data, project_kernel
from .families import InitialData
from .fields import DensityField
from .mixtures import GaussMix
from .model import ContinuousModel
from .stepwise import cell_midpoints

__all__ = [
    "ModeCoefficients",
    "forward_transform",
    "evolve_modes_b0",
    "evolve_modes_bnz",
    "strip_weight",
    "reassemble",
    "solve",
    "mode_matrix",
    "check_spectral_radius",
]

EXPM_OVERFLOW_LIMIT = 700.0
QUAD_TAIL_TOL = 1e-12
IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class ModeCoefficients:
    """Mode values a[k, j] = a_k(t, mu_grid[j]) on a symmetric uniform grid."""

    a: np.ndarray
    mu_grid: np.ndarray
    t: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        mu = np.asarray(self.mu_grid, dtype=float)
        if a.ndim != 2 or a.shape[1] != mu.size:
            raise ValueError("a must be (n_modes, n_mu)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "mu_grid", mu)

    def conjugate_symmetry_error(self) -> float:
        """max |a(-mu) - conj(a(mu))| (zero for real initial data)."""
        return float(np.abs(self.a[:, ::-1] - np.conj(self.a)).max())

    @staticmethod
    def from_mixtures(modes: Sequence[GaussMix], mu_grid, t: float) -> "ModeCoefficients":
        mu = np.asarray(mu_grid, dtype=float)
        return ModeCoefficients(np.stack([m.ft(mu) for m in modes]), mu, float(t))


def forward_transform(data: InitialData, basis: OrthonormalBasis) -> list[GaussMix]:
    """ghat_k(mu) = FT of g_k, closed form (a_k(0, mu) = ghat_k(mu)).

    The atoms of g_k and ghat_k coincide in the mixture representation:
    exp(-(x-m)^2)/sqrt(pi) -> exp(-mu^2/4) e^{-i m mu}, delta(x-m) -> e^{-i m mu}.
    """
    return project_initial_data(list(data.profiles), basis)


def mode_matrix(model: ContinuousModel, basis: OrthonormalBasis) -> KernelMatrix:
    return project_kernel(model.kernel, basis, breakpoints=model.breakpoints or None)


def _as_matrix(a) -> np.ndarray:
    return a.a if isinstance(a, KernelMatrix) else np.asarray(a, dtype=float)


def expm_modes(a, t: float) -> np.ndarray:
    """exp(A t) with the frozen zeroth mode enforced exactly.

    scipy's expm implements scaling-and-squaring with Pade approximants.  A
    vanishing first row is preserved in exact arithmetic; it is reimposed to
    keep a_0 frozen to the last bit.  Extreme inputs are reported rather than
    clamped.
    """
    amat = _as_matrix(a)
    if not np.all(np.isfinite(amat)):
        raise OverflowError("mode matrix contains non-finite entries")
    scale = float(np.abs(amat).max()) * abs(t)
    if scale > EXPM_OVERFLOW_LIMIT:
        raise OverflowError(f"matrix exponential overflow: |A| t = {scale:.3g} > "
                            f"{EXPM_OVERFLOW_LIMIT}")
    e = expm(amat * t)
    if np.abs(amat[0]).max() == 0.0:
        e[0, :] = 0.0
        e[0, 0] = 1.0
    return e


def check_spectral_radius(a, tol: float = 1e-12) -> np.ndarray:
    """Assert Re(eig) <= 0 for the mode-dynamics minor; return the eigenvalues."""
    amat = _as_matrix(a)
    eig = np.linalg.eigvals(amat[1:, 1:])
    if eig.size and eig.real.max() > tol:
        raise ValueError(f"mode matrix minor has eigenvalue with positive real part "
                         f"{eig[np.argmax(eig.real)]:.6g}")
    return eig


def evolve_modes_b0(a, modes, t: float):
    """a(t, .) = exp(A t) a(0, .); accepts mixture lists or gridded coefficients."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    e = expm_modes(a, t)
    if isinstance(modes, ModeCoefficients):
        return ModeCoefficients(e @ modes.a, modes.mu_grid, modes.t + t)
    return _combine(e, list(modes))


def evolve_modes_bnz(a, modes: Sequence[GaussMix], t: float, b_strip: float):
    """Modes on a strip with constant drift slope b != 0.

    Characteristics of  a_t = A a + b mu a_mu  give
    a(t, mu) = exp(A t) ghat(mu e^{b t}): the source a_0 is constant along
    each characteristic, so the Duhamel integral collapses to the same
    matrix-exponential weights as the b = 0 branch, applied to
    argument-scaled transforms.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    e = expm_modes(a, t)
    foot = float(np.exp(b_strip * t))
    return _combine(e, [m.scale_argument(foot) for m in modes])


def _combine(e: np.ndarray, modes: Sequence[GaussMix]) -> list[GaussMix]:
    out = []
    for k in range(e.shape[0]):
        mix = GaussMix()
        for l, m in enumerate(modes):
            if e[k, l] != 0.0 and m.n_atoms:
                mix = mix + e[k, l] * m
        out.append(mix.compact(tol=0.0))
    return out


def strip_weight(b: float, c: float, r: float, t: float) -> tuple[float, float]:
    """(f, g) of the change-of-variables weight exp(-f mu^2 - i g mu)."""
    if b == 0.0:
        return 0.5 * r * r * t, c * t
    f = (r * r / (4.0 * b)) * np.expm1(2.0 * b * t)
    g = (c / b) * np.expm1(b * t)
    return float(f), float(g)


def density_mixture_at_s(a, ghat: Sequence[GaussMix], model: ContinuousModel,
                         s: float, t: float) -> GaussMix:
    """The full p(t, ., s) as a mixture: weight o mode sum at this s."""
    bs = float(np.asarray(model.profile("b", s)))
    cs = float(np.asarray(model.profile("c", s)))
    rs = float(np.asarray(model.profile("r", s)))
    basis = a.basis if isinstance(a, KernelMatrix) else None
    if basis is None:
        raise TypeError("density_mixture_at_s needs a KernelMatrix (for its basis)")
    if bs == 0.0:
        evolved = evolve_modes_b0(a, ghat, t)
    else:
        evolved = evolve_modes_bnz(a, ghat, t, bs)
    f, g = strip_weight(bs, cs, rs, t)
    xl = basis.eval_all(np.asarray(s, dtype=float))
    mix = GaussMix()
    for k in range(basis.n):
        coeff = float(xl[k])
        if coeff != 0.0 and evolved[k].n_atoms:
            mix = mix + coeff * evolved[k]
    return mix.gauss_weight(f, g).compact(tol=0.0)


def _mu_grid_for(mix: GaussMix, x: np.ndarray, mu_max: float | None = None) -> np.ndarray:
    qmin = mix.min_q
    if qmin <= 0.0:
        raise ValueError("quadrature path refuses non-decaying transforms "
                         "(point mass present); use the closed route or t > 0")
    if mu_max is None:
        wsum = float(np.abs(mix.w).sum())
        mu_max = np.sqrt(max(np.log(wsum / QUAD_TAIL_TOL), 1.0) / qmin) * 1.05
    span = float(np.abs(x).max() + np.abs(mix.m).max() + 1.0)
    dmu = np.pi / span
    n = int(np.ceil(2 * mu_max / dmu)) | 1        # odd point count, symmetric grid
    return np.linspace(-mu_max, mu_max, n)


def _quadrature_density(mix: GaussMix, x: np.ndarray,
                        mu_max: float | None = None) -> np.ndarray:
    mu = _mu_grid_for(mix, x, mu_max)
    phat = mix.ft(mu)
    tail = max(abs(phat[0]), abs(phat[-1]))
    if tail > QUAD_TAIL_TOL:
        raise ValueError(f"mu-grid too coarse: integrand tail {tail:.3e} at "
                         f"mu_max = {mu[-1]:.3g}")
    dmu = mu[1] - mu[0]
    vals = np.exp(1j * np.outer(x, mu)) @ phat * (dmu / (2 * np.pi))
    resid = float(np.abs(vals.imag).max())
    if resid > IMAG_RESIDUE_TOL:
        raise ValueError(f"imaginary residue {resid:.3e} exceeds {IMAG_RESIDUE_TOL}")
    return vals.real


def reassemble(a: KernelMatrix, ghat: Sequence[GaussMix], model: ContinuousModel,
               times, x, s_samples, route: str = "closed",
               mu_max: float | None = None) -> DensityField:
    """p(t, x, s) = sum_l B_l(t, x, s) X_l(s) on the requested grid.

    ``mu_max`` overrides the quadrature cutoff; too small a value trips the
    integrand tail check.
    """
    if route not in ("closed", "quadrature"):
        raise ValueError("route must be 'closed' or 'quadrature'")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = np.asarray(x, dtype=float)
    s_samples = np.atleast_1d(np.asarray(s_samples, dtype=float))
    values = np.empty((times.size, s_samples.size, x.size))
    for it, t in enumerate(times):
        for js, s in enumerate(s_samples):
            mix = density_mixture_at_s(a, ghat, model, float(s), float(t))
            if route == "closed":
                if mix.has_delta:
                    raise ValueError("point mass not representable on a grid; "
                                     "evaluate at t > 0")
                values[it, js] = mix.density(x)
            else:
                values[it, js] = _quadrature_density(mix, x, mu_max)
    return DensityField(times, x, s_samples, values, kind="continuous")


def default_x_grid(model: ContinuousModel, data: InitialData, t_max: float,
                   dx: float = 0.025) -> np.ndarray:
    """[-L, L] sized so that the solution's Gaussian tails are negligible."""
    ss = np.linspace(0, 1, 65)
    bs = np.asarray(model.profile("b", ss), dtype=float)
    cs = np.abs(np.asarray(model.profile("c", ss), dtype=float))
    rmax = float(np.max(np.asarray(model.profile("r", ss), dtype=float)))
    m_max = float(np.abs(data.centers()).max()) if data.centers().size else 0.0
    w0 = data.min_width()
    neg = bs < 0
    if neg.any():
        drift = float(np.max(cs[neg] / np.abs(bs[neg])))   # OU rest points -c/b
        sig = np.sqrt(w0 ** 2 + rmax ** 2 / (2 * np.abs(bs[neg]).min()))
    else:
        drift = float(cs.max()) * t_max
        sig = np.sqrt(w0 ** 2 + rmax ** 2 * t_max)
    half = m_max + drift + 6.0 * sig + 2.0
    n = int(np.ceil(2 * half / dx)) + 1
    return np.linspace(-half, half, n)


def solve(model: ContinuousModel, data: InitialData, times, x=None,
          s_samples=None, basis: OrthonormalBasis | None = None,
          route: str = "closed", mu_max: float | None = None) -> DensityField:
    """End-to-end scheme: transform, evolve per strip, reassemble; mass recorded.

    Pure function of its immutable inputs; deterministic.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted ascending")
    if basis is None:
        n = model.ncells if model.is_stepwise else 8
        basis = OrthonormalBasis("haar", n)
    if x is None:
        x = default_x_grid(model, data, float(times.max()))
    if s_samples is None:
        ncells = model.ncells or 8
        s_samples = cell_midpoints(ncells)
    a = mode_matrix(model, basis)
    check_spectral_radius(a)
    model.strips()                      # validates sign-constancy of b per strip
    d = data
    if model.is_stepwise and model.ncells % d.ncells == 0 and model.ncells != d.ncells:
        d = d.refine(model.ncells)
    ghat = forward_transform(d, basis)
    return reassemble(a, ghat, model, times, x, s_samples, route, mu_max)
