"""Ground-truth engines: finite-difference method-of-lines and Monte Carlo.

Both engines solve the coupled forward system for a DiscreteModel

    dp_i/dt = sum_j Q^T_ij p_j - ((b_i x + c_i) p_i)_x + 1/2 (sigma_i^2 p_i)_xx

independently of the spectral construction: the FD path discretizes the
divergence form with second-order central differences and steps with the
classic 4-stage Runge-Kutta method; the MC path simulates the underlying
switching SDE with Euler-Maruyama steps and per-step categorical regime
draws.  They validate each other and everything the spectral machinery is
exact for.

Determinism: the FD loop is a single-threaded numba kernel with a fixed
reduction order; MC draws come from a counter-based Philox generator keyed by
the seed, with a fixed per-step draw layout, so identical seeds give
bit-identical ensembles independent of chunking.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
from numba import njit

from .families import InitialData
from .fields import CompareReport, DensityField, compare_fields
from .model import DiscreteModel

__all__ = [
    "FDGrid",
    "CFLError",
    "fd_solve",
    "PathEnsemble",
    "mc_simulate",
    "estimate_density",
    "compare",
    "default_half_width",
]

DELTA_MOLLIFY_CELLS = 3.0      # delta data becomes a Gaussian of std 3 dx
BOUNDARY_DENSITY_TOL = 1e-8    # reported as leakage above this


class CFLError(ValueError):
    pass


def default_half_width(dm: DiscreteModel, data: InitialData, t_final: float,
                       tail_density: float = 1e-12) -> float:
    """Half-width so that the boundary density stays below ``tail_density``.

    Uses the running Gaussian envelope of the states (OU rest points -c/b for
    mean-reverting states); the envelope's tail equation is solved for the
    required padding, with the 6-sigma-plus-margin rule as a floor.
    """
    m_max = float(np.abs(data.centers()).max()) if data.centers().size else 0.0
    w0 = data.min_width()
    neg = dm.b < 0
    if neg.any():
        drift = float(np.max(np.abs(dm.c[neg] / dm.b[neg])))
        sig = float(np.sqrt(w0 ** 2 + (dm.sigma ** 2 / (2 * np.abs(dm.b)))[neg].max()))
    else:
        drift = float(np.abs(dm.c).max()) * t_final
        sig = float(np.sqrt(w0 ** 2 + (dm.sigma.max() ** 2) * t_final))
    # padding p with exp(-p^2 / 2 sig^2) / sqrt(2 pi sig^2) = tail_density
    arg = max(1.0, 1.0 / (tail_density * np.sqrt(2 * np.pi) * sig))
    pad = sig * np.sqrt(2 * np.log(arg))
    return m_max + drift + max(pad, 6.0 * sig) + 2.0


@dataclass(frozen=True)
class FDGrid:
    """Uniform grid on [-L, L] with nx interior points and Dirichlet walls."""

    half_width: float
    nx: int
    dt: float | None = None

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.nx + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * (1 + np.arange(self.nx))

    def stable_dt(self, dm: DiscreteModel) -> float:
        diff = 0.5 * self.dx ** 2 / float(np.max(dm.sigma) ** 2)
        vmax = float(np.max(np.abs(dm.b) * self.half_width + np.abs(dm.c)))
        adv = self.dx / vmax if vmax > 0 else np.inf
        return min(diff, 0.9 * adv)

    @staticmethod
    def for_model(dm: DiscreteModel, data: InitialData, t_final: float,
                  dx: float = 0.02) -> "FDGrid":
        half = default_half_width(dm, data, t_final)
        nx = int(np.ceil(2 * half / dx)) - 1
        return FDGrid(half_width=half, nx=nx)


@njit(cache=True)
def _rhs(p, qt, drift, dcoef, inv2dx, invdx2, out):
    # divergence-form stencil with Dirichlet walls (ghost values 0) plus the
    # Q^T coupling; interior loop kept branch-free so it vectorizes
    ns, nx = p.shape
    for i in range(ns):
        d = dcoef[i]
        for j in range(1, nx - 1):
            out[i, j] = (-(drift[i, j + 1] * p[i, j + 1] - drift[i, j - 1] * p[i, j - 1]) * inv2dx
                         + d * (p[i, j + 1] - 2.0 * p[i, j] + p[i, j - 1]) * invdx2)
        out[i, 0] = (-drift[i, 1] * p[i, 1] * inv2dx
                     + d * (p[i, 1] - 2.0 * p[i, 0]) * invdx2)
        out[i, nx - 1] = (drift[i, nx - 2] * p[i, nx - 2] * inv2dx
                          + d * (p[i, nx - 2] - 2.0 * p[i, nx - 1]) * invdx2)
    for i in range(ns):
        for k in range(ns):
            q = qt[i, k]
            if q != 0.0:
                for j in range(nx):
                    out[i, j] += q * p[k, j]


@njit(cache=True)
def _rk4_segment(p, qt, drift, dcoef, dx, dt, nsteps):
    ns, nx = p.shape
    inv2dx = 1.0 / (2.0 * dx)
    invdx2 = 1.0 / (dx * dx)
    k1 = np.empty_like(p)
    k2 = np.empty_like(p)
    k3 = np.empty_like(p)
    k4 = np.empty_like(p)
    tmp = np.empty_like(p)
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(nsteps):
        _rhs(p, qt, drift, dcoef, inv2dx, invdx2, k1)
        for i in range(ns):
            for j in range(nx):
                tmp[i, j] = p[i, j] + half * k1[i, j]
        _rhs(tmp, qt, drift, dcoef, inv2dx, invdx2, k2)
        for i in range(ns):
            for j in range(nx):
                tmp[i, j] = p[i, j] + half * k2[i, j]
        _rhs(tmp, qt, drift, dcoef, inv2dx, invdx2, k3)
        for i in range(ns):
            for j in range(nx):
                tmp[i, j] = p[i, j] + dt * k3[i, j]
        _rhs(tmp, qt, drift, dcoef, inv2dx, invdx2, k4)
        for i in range(ns):
            for j in range(nx):
                p[i, j] += sixth * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
    return p


def _initial_profiles(dm: DiscreteModel, data, x: np.ndarray, dx: float) -> np.ndarray:
    if isinstance(data, np.ndarray):
        if data.shape != (dm.n_states, x.size):
            raise ValueError("initial array must be (n_states, nx)")
        return data.astype(float).copy()
    if isinstance(data, InitialData):
        if data.ncells != dm.n_states:
            if dm.n_states % data.ncells:
                raise ValueError("initial data cells incompatible with state count")
            data = data.refine(dm.n_states)
        out = np.zeros((dm.n_states, x.size))
        for i, prof in enumerate(data.profiles):
            for w, m, q in zip(prof.w, prof.m, prof.q):
                if q == 0.0:
                    sig = DELTA_MOLLIFY_CELLS * dx
                    out[i] += w * np.exp(-((x - m) ** 2) / (2 * sig ** 2)) / (np.sqrt(2 * np.pi) * sig)
                else:
                    out[i] += w * np.exp(-((x - m) ** 2) / (4 * q)) / np.sqrt(4 * np.pi * q)
        return out
    raise TypeError("data must be InitialData or an (n_states, nx) array")


def fd_solve(dm: DiscreteModel, data, grid: FDGrid, save_times,
             boundary_tol: float = BOUNDARY_DENSITY_TOL) -> DensityField:
    """Method-of-lines solution of the coupled forward system, per state.

    Raises :class:`CFLError` when the requested dt violates the stability
    bounds, and reports boundary leakage when the walls see density above
    ``boundary_tol``.
    """
    save_times = np.atleast_1d(np.asarray(save_times, dtype=float))
    if np.any(np.diff(save_times) < 0) or save_times.size == 0:
        raise ValueError("save_times must be nonempty ascending")
    if save_times[0] < 0:
        raise ValueError("save_times must be nonnegative")
    x = grid.x
    dt_max = grid.stable_dt(dm)
    dt = grid.dt if grid.dt is not None else dt_max
    if dt > dt_max * (1 + 1e-12):
        raise CFLError(f"dt = {dt:.3e} exceeds the stability bound {dt_max:.3e}")
    p = _initial_profiles(dm, data, x, grid.dx)
    qt = np.ascontiguousarray(dm.q_forward())
    drift = dm.b[:, None] * x[None, :] + dm.c[:, None]
    dcoef = 0.5 * dm.sigma ** 2
    out = np.empty((save_times.size, dm.n_states, x.size))
    t = 0.0
    worst_leak = 0.0
    for it, ts in enumerate(save_times):
        span = ts - t
        if span > 1e-14:
            nsteps = int(np.ceil(span / dt))
            p = _rk4_segment(p, qt, drift, dcoef, grid.dx, span / nsteps, nsteps)
            t = ts
        out[it] = p
        worst_leak = max(worst_leak, float(np.abs(p[:, 0]).max()),
                         float(np.abs(p[:, -1]).max()))
    if worst_leak > boundary_tol:
        raise RuntimeError(f"boundary leakage: wall density reached {worst_leak:.3e} "
                           f"(> {boundary_tol:.1e}); enlarge the domain")
    return DensityField(save_times, x, np.arange(dm.n_states, dtype=float), out,
                        kind="discrete")


@dataclass(frozen=True)
class PathEnsemble:
    """Snapshots of (x, state) for all paths at the save times."""

    save_times: np.ndarray
    x: np.ndarray              # (nt, n_paths)
    state: np.ndarray          # (nt, n_paths) int8
    seed: int
    dt_sde: float
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.x.shape[1]

    def state_fractions(self, it: int = -1) -> np.ndarray:
        counts = np.bincount(self.state[it], minlength=int(self.state.max()) + 1)
        return counts / self.n_paths

    def ensemble_meta(self) -> dict:
        return {"seed": self.seed, "n_paths": self.n_paths, "dt_sde": self.dt_sde}


def _sample_initial(dm: DiscreteModel, data: InitialData, n_paths: int, rng):
    """Initial (state, x) draws: states carry equal mass for the shipped families."""
    if data.ncells != dm.n_states:
        if dm.n_states % data.ncells:
            raise ValueError("initial data cells incompatible with state count")
        data = data.refine(dm.n_states)
    state = rng.integers(0, dm.n_states, size=n_paths).astype(np.int8)
    x = np.empty(n_paths)
    for i, prof in enumerate(data.profiles):
        mask = state == i
        n = int(mask.sum())
        if prof.n_atoms != 1 or prof.w[0] <= 0:
            raise ValueError("MC sampling supports single-atom per-state profiles")
        m, q = float(prof.m[0]), float(prof.q[0])
        x[mask] = m if q == 0.0 else m + np.sqrt(2 * q) * rng.standard_normal(n)
    return state, x


def mc_simulate(dm: DiscreteModel, data: InitialData, n_paths: int, t_final: float,
                dt_sde: float, seed: int, save_times=None) -> PathEnsemble:
    """Euler-Maruyama paths of the switching SDE, seedable and reproducible.

    Per step: dx = (b_i x + c_i) dt + sigma_i sqrt(dt) xi with the current
    regime's coefficients, then a categorical regime draw with first-order
    probabilities q_ij dt.  Precondition: dt_sde * max |q_ii| <= 0.1.
    """
    if n_paths < 1:
        raise ValueError("need at least one path")
    qmax = float(np.abs(np.diag(dm.q)).max())
    if dt_sde * qmax > 0.1 + 1e-12:
        raise ValueError(f"dt_sde too coarse for the switching rates: "
                         f"dt * max|q_ii| = {dt_sde * qmax:.3f} > 0.1")
    if save_times is None:
        save_times = np.array([t_final])
    save_times = np.atleast_1d(np.asarray(save_times, dtype=float))
    if np.any(np.diff(save_times) < 0) or save_times[-1] > t_final + 1e-12:
        raise ValueError("save_times must be ascending and <= t_final")
    rng = np.random.Generator(np.random.Philox(key=seed))
    state, x = _sample_initial(dm, data, n_paths, rng)
    ns = dm.n_states
    # per-state switch thresholds over off-diagonal targets; last slot = stay
    pstep = dm.q * dt_sde
    np.fill_diagonal(pstep, 0.0)
    target = [np.array([j for j in range(ns) if j != i] + [i]) for i in range(ns)]
    cums = [np.concatenate([np.cumsum(pstep[i][target[i][:-1]]), [np.inf]]) for i in range(ns)]
    b, c, sig = dm.b, dm.c, dm.sigma
    sqdt = np.sqrt(dt_sde)
    nsteps = int(np.ceil(t_final / dt_sde))
    save_idx = np.minimum(np.round(save_times / dt_sde).astype(int), nsteps)
    out_x = np.empty((save_times.size, n_paths))
    out_s = np.empty((save_times.size, n_paths), dtype=np.int8)
    ptr = 0
    while ptr < save_idx.size and save_idx[ptr] == 0:
        out_x[ptr], out_s[ptr] = x, state
        ptr += 1
    for step in range(1, nsteps + 1):
        xi = rng.standard_normal(n_paths)
        u = rng.random(n_paths)
        x = x + (b[state] * x + c[state]) * dt_sde + sig[state] * sqdt * xi
        new_state = state.copy()
        for i in range(ns):
            mask = state == i
            if not mask.any():
                continue
            pick = np.digitize(u[mask], cums[i])
            new_state[mask] = target[i][np.minimum(pick, ns - 1)].astype(np.int8)
        state = new_state
        if not np.all(np.isfinite(x)) or np.abs(x).max() > 1e12:
            bad = np.where(~np.isfinite(x) | (np.abs(x) > 1e12))[0]
            raise FloatingPointError(f"unstable parameters: {bad.size} paths overflowed "
                                     f"at step {step} (first: {bad[:5]})")
        while ptr < save_idx.size and save_idx[ptr] == step:
            out_x[ptr], out_s[ptr] = x, state
            ptr += 1
    return PathEnsemble(save_times, out_x, out_s, int(seed), float(dt_sde),
                        meta={"n_steps": nsteps})


def estimate_density(ensemble: PathEnsemble, bins: int = 200,
                     x_range: tuple[float, float] | None = None) -> DensityField:
    """Per-state histogram densities, normalized so sum_states int p dx = 1."""
    if ensemble.n_paths == 0:
        raise ValueError("empty ensemble")
    ns = int(ensemble.state.max()) + 1
    if x_range is None:
        x_range = (float(ensemble.x.min()), float(ensemble.x.max()))
    edges = np.linspace(x_range[0], x_range[1], bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    db = edges[1] - edges[0]
    nt = ensemble.save_times.size
    values = np.zeros((nt, ns, bins))
    for it in range(nt):
        for i in range(ns):
            xs = ensemble.x[it][ensemble.state[it] == i]
            counts, _ = np.histogram(xs, bins=edges)
            values[it, i] = counts / (ensemble.n_paths * db)
    return DensityField(ensemble.save_times, centers, np.arange(ns, dtype=float),
                        values, kind="discrete")


def compare(pa: DensityField, pb: DensityField, norm: str = "Linf") -> CompareReport:
    """Norm of the difference per saved time and state/s-sample (see fields)."""
    return compare_fields(pa, pb, norm)
