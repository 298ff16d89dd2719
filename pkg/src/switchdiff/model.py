"""Model specifications for regime-switching diffusions and their embedding.

A :class:`DiscreteModel` holds the generator matrix Q (rows = source state,
rows sum to zero) and per-state linear-drift coefficients b_i, c_i and
diffusions sigma_i; the forward equation uses Q^T:

    dp_i/dt = sum_j Q^T_ij p_j - ((b_i x + c_i) p_i)_x + 1/2 (sigma_i^2 p_i)_xx.

A :class:`ContinuousModel` holds a kernel K(s, xi) on [0,1]^2 together with
profiles b(s), c(s), R(s); hidden states are distributed over [0,1] and the
switching term is the integral operator p -> int K(., xi) p(xi) dxi.

The embedding of a discrete model places state i on the cell
[i/(M+1), (i+1)/(M+1)) and copies coefficients verbatim (inverted exactly by
midpoint sampling).  Note that copying
the rates verbatim makes the integral operator act with rates h * q_ji,
h = 1/(M+1), because each cell has measure h; :meth:`ContinuousModel.cell_system`
returns the discrete model whose (1p)-dynamics is *exactly* the continuous
dynamics on the cells, which is what the finite-difference and Monte-Carlo
oracles must solve when cross-validating the spectral machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .basis import QPropertyReport, check_q_property_continuous
from .stepwise import StepwiseFunction, StepwiseKernel, cell_midpoints

__all__ = [
    "DiscreteModel",
    "ContinuousModel",
    "ValidationReport",
    "discrete_to_continuous",
    "continuous_to_discrete",
    "validate",
]


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple  # (name, passed, magnitude, location) rows

    @property
    def passed(self) -> bool:
        return all(row[1] for row in self.checks)

    def failures(self):
        return [row for row in self.checks if not row[1]]

    def summary(self) -> str:
        lines = []
        for name, ok, mag, loc in self.checks:
            lines.append(f"  [{'ok' if ok else 'FAIL'}] {name}: worst {mag:.3e} at {loc}")
        return "\n".join(lines)


@dataclass(frozen=True)
class DiscreteModel:
    """M+1 states (state 0 is the main state), generator-oriented Q."""

    q: np.ndarray          # (M+1, M+1), rows sum to zero, off-diagonals >= 0
    b: np.ndarray          # linear-drift slopes, 1/time
    c: np.ndarray          # drift offsets, x/time
    sigma: np.ndarray      # diffusions, x/sqrt(time), > 0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        n = q.shape[0]
        if q.ndim != 2 or q.shape != (n, n):
            raise ValueError("Q must be square")
        object.__setattr__(self, "q", q)
        for name in ("b", "c", "sigma"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if arr.size == 1:
                arr = np.full(n, arr[0])
            if arr.size != n:
                raise ValueError(f"{name} must have one entry per state")
            object.__setattr__(self, name, arr)

    @property
    def n_states(self) -> int:
        return self.q.shape[0]

    @property
    def m_hidden(self) -> int:
        return self.n_states - 1

    def q_forward(self) -> np.ndarray:
        """Q^T, the coupling matrix of the forward equation."""
        return self.q.T.copy()

    def validate(self) -> ValidationReport:
        q = self.q
        off = q.copy()
        np.fill_diagonal(off, 0.0)
        neg = off.min()
        loc_neg = np.unravel_index(int(np.argmin(off)), off.shape)
        rows = np.abs(q.sum(axis=1))
        loc_row = int(np.argmax(rows))
        sig_min = float(self.sigma.min())
        checks = (
            ("off-diagonal rates nonnegative", neg >= 0, float(-min(neg, 0.0)), str(loc_neg)),
            ("generator rows sum to zero", rows.max() <= 1e-12, float(rows.max()), f"row {loc_row}"),
            ("sigma positive", sig_min > 0, float(max(0.0, -sig_min)),
             f"state {int(np.argmin(self.sigma))}"),
        )
        return ValidationReport(checks)


@dataclass(frozen=True)
class ContinuousModel:
    """Kernel K(s,xi) plus drift/diffusion profiles on [0,1]."""

    kernel: object                      # StepwiseKernel or callable (s, xi) -> float
    b: object                           # StepwiseFunction or callable
    c: object
    r: object                           # diffusion profile R(s) > 0
    breakpoints: tuple = field(default=())

    def profile(self, name: str, s) -> np.ndarray:
        fn = getattr(self, name)
        return fn(np.asarray(s, dtype=float)) if callable(fn) else fn(s)

    @property
    def is_stepwise(self) -> bool:
        return isinstance(self.kernel, StepwiseKernel)

    @property
    def ncells(self) -> int | None:
        return self.kernel.ncells if self.is_stepwise else None

    def strips(self) -> list[tuple[float, float]]:
        """Maximal intervals on which all profiles are smooth and sign(b) constant."""
        pts = {0.0, 1.0}
        pts.update(float(p) for p in self.breakpoints)
        if self.is_stepwise:
            n = self.kernel.ncells
            pts.update(np.arange(1, n) / n)
        for prof in (self.b, self.c, self.r):
            if isinstance(prof, StepwiseFunction):
                n = prof.ncells
                pts.update(np.arange(1, n) / n)
        edges = sorted(pts)
        strips = list(zip(edges[:-1], edges[1:]))
        for a, bnd in strips:
            mids = np.linspace(a, bnd, 9)[1:-1]
            bs = np.asarray(self.profile("b", mids), dtype=float)
            if bs.max() > 0 > bs.min():
                raise ValueError(f"sign(b) changes inside strip ({a}, {bnd}); "
                                 "add a breakpoint at the sign change")
        return strips

    def validate(self, samples: int = 257) -> ValidationReport:
        qrep: QPropertyReport = check_q_property_continuous(self.kernel, samples)
        ss = np.linspace(0.0, 1.0, samples)
        rr = np.asarray(self.profile("r", ss), dtype=float)
        rmin = rr.min()
        checks = (
            ("kernel diagonal negative", qrep.worst_diagonal < 0,
             float(max(qrep.worst_diagonal, 0.0)), f"s={qrep.diagonal_location:.4f}"),
            ("kernel s-integrals zero", qrep.worst_column_integral <= qrep.tol,
             float(qrep.worst_column_integral), f"xi={qrep.column_location:.4f}"),
            ("R bounded below by R_min > 0", rmin > 0, float(max(0.0, -rmin)),
             f"s={ss[int(np.argmin(rr))]:.4f}"),
        )
        return ValidationReport(checks)

    def cell_system(self) -> DiscreteModel:
        """Exact cell dynamics of a stepwise model as a DiscreteModel.

        The integral switching term on stepwise densities reads
        sum_i (1/ncells) K_ji p_i, so the equivalent generator carries the
        cell-measure factor h = 1/ncells relative to the raw kernel values.
        """
        if not self.is_stepwise:
            raise ValueError("cell_system requires a stepwise kernel")
        n = self.kernel.ncells
        mids = cell_midpoints(n)
        q_forward = self.kernel.grid / n          # h * q_ji, rows = target
        return DiscreteModel(q=q_forward.T,
                             b=np.asarray(self.profile("b", mids), dtype=float),
                             c=np.asarray(self.profile("c", mids), dtype=float),
                             sigma=np.asarray(self.profile("r", mids), dtype=float))


def discrete_to_continuous(dm: DiscreteModel) -> ContinuousModel:
    """Embed a discrete model on uniform cells, copying rates verbatim."""
    rep = dm.validate()
    if not rep.passed:
        raise ValueError("invalid Q-matrix:\n" + rep.summary())
    kernel = StepwiseKernel(dm.q.T)               # K[j, i] = q_ji = rate into j from i
    if np.diag(kernel.grid).max() >= 0:
        raise ValueError("embedded kernel fails diagonal negativity "
                         "(a state with no outflow such as M=0 is rejected)")
    cm = ContinuousModel(kernel=kernel,
                         b=StepwiseFunction(dm.b),
                         c=StepwiseFunction(dm.c),
                         r=StepwiseFunction(dm.sigma))
    qrep = check_q_property_continuous(kernel)
    if not qrep.passed:
        raise ValueError(qrep.summary())
    return cm


def continuous_to_discrete(cm: ContinuousModel, ncells: int) -> DiscreteModel:
    """Midpoint-sample a continuous model on ``ncells`` uniform cells.

    Inverts :func:`discrete_to_continuous` exactly for aligned stepwise models.
    The resulting rates are the raw kernel values (no cell-measure factor);
    use :meth:`ContinuousModel.cell_system` for the dynamics-equivalent system.
    """
    if ncells < 2:
        raise ValueError("need at least two states")
    mids = cell_midpoints(ncells)
    k = np.array([[float(np.asarray(cm.kernel(sj, si)))
                   for si in mids] for sj in mids])
    return DiscreteModel(q=k.T,
                         b=np.asarray(cm.profile("b", mids), dtype=float),
                         c=np.asarray(cm.profile("c", mids), dtype=float),
                         sigma=np.asarray(cm.profile("r", mids), dtype=float))


def validate(model) -> ValidationReport:
    """Invariant checks for either model kind, with worst-violation magnitudes."""
    return model.validate()
