"""Scenario configuration: model + data + solver + grids, with named presets.

A scenario references one model (discrete spec or inline Haar-coefficient
kernel), one initial-data family, exactly one solver and a sorted list of
save times.  The continuous embedding is the canonical dynamics; the FD and
MC oracles receive the dynamics-equivalent cell system (rates h * K), so all
four solvers target the same evolution.

Config files are flat ``key = value`` text; ``#`` starts a comment.  Parse
errors report the line number and key.  Documented keys:

    states      int, number of states (cells)
    Q           row-major generator matrix, states^2 floats
    kernel_haar_coeffs   alternative to Q: row-major Haar coefficient matrix
    b, c, sigma per-state lists (sigma > 0)
    family      uniform_gaussian | uniform_delta | stepwise_gaussian | stepwise_delta
    means       per-state list (stepwise families) or single center (uniform_delta)
    solver      spectral | closed_form | fd | mc
    times       ascending list of save times
    seed        integer (MC)
    out         output CSV path
    grid_dx     x-resolution (default 0.025; FD default 0.02)
    grid_nx     overrides grid_dx with an explicit interior point count
    half_width  x-domain half width (default: sized from the model)
    mu_max      quadrature mu cutoff override (spectral route)
    paths       MC path count (default 100000)
    dt_sde      MC time step (default 0.05)
    bins        MC histogram bins (default 200)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .basis import OrthonormalBasis
from .families import (InitialData, stepwise_delta, stepwise_gaussian,
                       uniform_delta, uniform_gaussian)
from .fields import DensityField
from .model import ContinuousModel, DiscreteModel, discrete_to_continuous
from .oracle import FDGrid, estimate_density, fd_solve, mc_simulate
from .spectral import default_x_grid, solve
from .stepwise import cell_midpoints

__all__ = ["Scenario", "ConfigError", "ValidationFailure", "parse_config",
           "load_scenario", "preset", "run_scenario", "PRESET_NAMES"]

SOLVERS = ("spectral", "closed_form", "fd", "mc")
FAMILIES = ("uniform_gaussian", "uniform_delta", "stepwise_gaussian", "stepwise_delta")


class ConfigError(ValueError):
    pass


class ValidationFailure(ValueError):
    """A model or invariant check failed (CLI exit code 1)."""


@dataclass(frozen=True)
class Scenario:
    name: str
    dm: DiscreteModel
    data: InitialData
    solver: str
    times: tuple
    seed: int = 20240101
    out: str = "out.csv"
    grid_dx: float | None = None
    grid_nx: int | None = None
    half_width: float | None = None
    mu_max: float | None = None
    paths: int = 100_000
    dt_sde: float = 0.05
    bins: int = 200

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; pick one of {SOLVERS}")
        ts = tuple(float(t) for t in self.times)
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ConfigError("save times must be sorted ascending")
        object.__setattr__(self, "times", ts)
        rep = self.dm.validate()
        if not rep.passed:
            raise ValidationFailure("invalid model:\n" + rep.summary())

    def continuous(self) -> ContinuousModel:
        return discrete_to_continuous(self.dm)

    def cell_dynamics(self) -> DiscreteModel:
        """The coupled system all oracles solve (rates h * kernel values)."""
        return self.continuous().cell_system()

    def x_grid(self, dx_default: float = 0.025) -> np.ndarray:
        dx = self.grid_dx or dx_default
        if self.half_width is not None:
            half = self.half_width
            nx = self.grid_nx or (int(np.ceil(2 * half / dx)) + 1)
            return np.linspace(-half, half, nx)
        grid = default_x_grid(self.continuous(), self.data, max(self.times), dx)
        if self.grid_nx:
            return np.linspace(grid[0], grid[-1], self.grid_nx)
        return grid


def run_scenario(sc: Scenario):
    """Execute the scenario's solver; returns (DensityField, artifacts dict).

    Continuous-route fields (spectral, closed_form) and the FD field share
    the same units: per-state slices p(t, x, s_j) of the continuous density.
    MC histograms are probability-normalized (sum of state masses = 1) per
    the estimate_density contract; multiply by the state count to land in
    field units.
    """
    cm = sc.continuous()
    artifacts: dict = {}
    if sc.solver in ("spectral", "closed_form"):
        route = "quadrature" if sc.solver == "spectral" else "closed"
        x = sc.x_grid()
        fld = solve(cm, sc.data, list(sc.times), x=x, route=route, mu_max=sc.mu_max)
    elif sc.solver == "fd":
        dm = sc.cell_dynamics()
        dx = sc.grid_dx or 0.02
        if sc.half_width is not None:
            nx = sc.grid_nx or (int(np.ceil(2 * sc.half_width / dx)) - 1)
            grid = FDGrid(half_width=sc.half_width, nx=nx)
        else:
            grid = FDGrid.for_model(dm, sc.data, max(sc.times), dx=dx)
            if sc.grid_nx:
                grid = FDGrid(half_width=grid.half_width, nx=sc.grid_nx)
        fld = fd_solve(dm, sc.data, grid, list(sc.times))
    else:
        dm = sc.cell_dynamics()
        ens = mc_simulate(dm, sc.data, sc.paths, max(sc.times), sc.dt_sde,
                          sc.seed, save_times=list(sc.times))
        fld = estimate_density(ens, bins=sc.bins)
        artifacts["ensemble_meta"] = ens.ensemble_meta()
    return fld, artifacts


# ---- presets matching the published figure captions ------------------------

def _two_state_dm(b1, b2):
    return DiscreteModel(q=[[-1.0, 1.0], [2.0, -2.0]],
                         b=[b1, b2], c=[1.0, 1.0], sigma=[1.0, 2.0])


def preset(name: str) -> Scenario:
    """fig1 / fig2 / fig3 preset scenarios (closed_form solver by default)."""
    if name in ("fig1", "1"):
        return Scenario(name="fig1", dm=_two_state_dm(0.0, 0.0),
                        data=stepwise_gaussian([5.0, -5.0]),
                        solver="closed_form", times=(0.0, 1.0, 10.0))
    if name in ("fig2", "2"):
        return Scenario(name="fig2", dm=_two_state_dm(-0.5, -1.0),
                        data=stepwise_delta([5.0, -5.0]),
                        solver="closed_form", times=(0.1, 0.5, 100.0))
    if name in ("fig3", "3"):
        lam1, lam2 = 0.4, 0.2
        r0 = 1.7
        lam = lam1 + lam2
        q_forward = np.array([
            [-lam, lam1, lam2, 0.0],
            [lam2, -lam, 0.0, lam1],
            [lam1, 0.0, -lam, lam2],
            [0.0, lam2, lam1, -lam]])
        r2 = [r0 ** 2, r0 * (2 - r0), r0 * (2 - r0), (2 - r0) ** 2]
        dm = DiscreteModel(q=q_forward.T, b=np.zeros(4), c=np.zeros(4),
                           sigma=np.sqrt(r2))
        return Scenario(name="fig3", dm=dm,
                        data=stepwise_gaussian([-10.0, 1.0, -5.0, 10.0]),
                        solver="closed_form", times=(0.0, 3.0, 15.0))
    raise ConfigError(f"unknown preset {name!r}; use fig1, fig2 or fig3")


PRESET_NAMES = ("fig1", "fig2", "fig3")


# ---- flat key = value config ------------------------------------------------

def parse_config(text: str) -> dict:
    """Parse flat key = value lines; raise ConfigError with line/key context."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = (value, lineno)
    return out


def _floats(raw: str, key: str, lineno: int) -> list[float]:
    try:
        return [float(tok) for tok in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None


def load_scenario(path, overrides: dict | None = None) -> Scenario:
    """Build a Scenario from a config file plus CLI flag overrides."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text)

    def take(key, default=None):
        if key in cfg:
            return cfg.pop(key)
        return (default, 0) if default is not None else None

    def need(key):
        got = take(key)
        if got is None:
            raise ConfigError(f"missing required key {key!r}")
        return got

    states_raw, ln = need("states")
    try:
        n = int(states_raw)
    except ValueError:
        raise ConfigError(f"line {ln}: states must be an integer") from None
    if "Q" in cfg and "kernel_haar_coeffs" in cfg:
        raise ConfigError("give either Q or kernel_haar_coeffs, not both")
    if "Q" in cfg:
        raw, ln = take("Q")
        vals = _floats(raw, "Q", ln)
        if len(vals) != n * n:
            raise ConfigError(f"line {ln}: Q needs {n * n} entries, got {len(vals)}")
        q = np.array(vals).reshape(n, n)
    elif "kernel_haar_coeffs" in cfg:
        raw, ln = take("kernel_haar_coeffs")
        vals = _floats(raw, "kernel_haar_coeffs", ln)
        if len(vals) != n * n:
            raise ConfigError(f"line {ln}: kernel_haar_coeffs needs {n * n} entries")
        a = np.array(vals).reshape(n, n)
        basis = OrthonormalBasis("haar", n)
        mids = cell_midpoints(n)
        xl = basis.eval_all(mids)                 # (n, ncells)
        kernel_grid = xl.T @ a @ xl               # reconstruct on cells
        q = kernel_grid.T
    else:
        raise ConfigError("missing required key 'Q' (or 'kernel_haar_coeffs')")

    def per_state(key):
        raw, ln = need(key)
        vals = _floats(raw, key, ln)
        if len(vals) == 1:
            vals = vals * n
        if len(vals) != n:
            raise ConfigError(f"line {ln}: {key} needs {n} entries, got {len(vals)}")
        return np.array(vals)

    dm = DiscreteModel(q=q, b=per_state("b"), c=per_state("c"), sigma=per_state("sigma"))

    fam_raw, ln = need("family")
    if fam_raw not in FAMILIES:
        raise ConfigError(f"line {ln}: unknown family {fam_raw!r}; pick one of {FAMILIES}")
    if fam_raw == "uniform_gaussian":
        data = uniform_gaussian()
    elif fam_raw == "uniform_delta":
        got = take("means", "0")
        data = uniform_delta(_floats(got[0], "means", got[1])[0])
    else:
        raw, lnm = need("means")
        means = _floats(raw, "means", lnm)
        if len(means) != n:
            raise ConfigError(f"line {lnm}: means needs {n} entries, got {len(means)}")
        data = (stepwise_gaussian if fam_raw == "stepwise_gaussian" else stepwise_delta)(means)

    solver_raw, ln = need("solver")
    times_raw, lnt = need("times")
    times = tuple(_floats(times_raw, "times", lnt))

    kwargs = dict(name=str(path), dm=dm, data=data, solver=solver_raw, times=times)
    scalars = {"seed": int, "out": str, "grid_dx": float, "grid_nx": int,
               "half_width": float, "mu_max": float, "paths": int,
               "dt_sde": float, "bins": int}
    for key, cast in scalars.items():
        got = take(key)
        if got is not None:
            raw, ln = got
            try:
                kwargs[key] = cast(raw)
            except ValueError:
                raise ConfigError(f"line {ln}: key {key!r}: cannot parse {raw!r}") from None
    if cfg:
        key, (_, ln) = next(iter(cfg.items()))
        raise ConfigError(f"line {ln}: unknown key {key!r}")
    sc = Scenario(**kwargs)
    if overrides:
        sc = replace(sc, **overrides)
    return sc


def write_artifacts(sc: Scenario, fld: DensityField, artifacts: dict,
                    out: str | None = None) -> list[str]:
    """Write the CSV (+ ensemble_meta sidecar); returns written paths."""
    out_path = out or sc.out
    fld.to_csv(out_path)
    written = [out_path]
    if "ensemble_meta" in artifacts:
        side = str(out_path) + ".ensemble_meta.json"
        with open(side, "w") as fh:
            json.dump(artifacts["ensemble_meta"], fh, sort_keys=True, indent=1)
        written.append(side)
    return written
