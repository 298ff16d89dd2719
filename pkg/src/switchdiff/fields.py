"""Density fields sampled on (t, x, s) grids, with CSV export/import.

Continuous fields sample p(t, x, s) at s-points (cell midpoints by default);
discrete fields hold per-state densities.  The per-slice mass bookkeeping
uses the trapezoid rule in x and, for continuous fields, the cell measure in
s (states are cells of width 1/ns).

CSV schema (fixed 17-significant-digit rendering for byte reproducibility):

    t,x,s,p        (continuous)      t,x,state,p     (discrete)

followed by one ``# mass t=<t> <value>`` footer comment line per time slice.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

__all__ = ["DensityField", "compare_fields", "CompareReport"]

_FMT = "%.17g"
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class DensityField:
    """values[it, js, ix] = p(times[it], x[ix], s[js])."""

    times: np.ndarray
    x: np.ndarray
    s: np.ndarray                  # s-samples (continuous) or state indices (discrete)
    values: np.ndarray
    kind: str = "continuous"       # "continuous" | "discrete"

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        x = np.asarray(self.x, dtype=float)
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (t.size, s.size, x.size):
            raise ValueError(f"values shape {v.shape} != (nt, ns, nx) = "
                             f"({t.size}, {s.size}, {x.size})")
        if self.kind not in ("continuous", "discrete"):
            raise ValueError("kind must be 'continuous' or 'discrete'")
        for name, val in (("times", t), ("x", x), ("s", s), ("values", v)):
            object.__setattr__(self, name, val)

    # ---- mass bookkeeping ---------------------------------------------------
    def masses(self) -> np.ndarray:
        """Total mass per saved time (trapezoid in x; cell measure in s)."""
        mx = _trapezoid(self.values, self.x, axis=2)      # (nt, ns)
        if self.kind == "continuous":
            return mx.mean(axis=1)                      # cells have measure 1/ns
        return mx.sum(axis=1)

    def min_value(self) -> float:
        return float(self.values.min())

    def slice_at(self, t: float) -> np.ndarray:
        it = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[it] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} not among saved times {self.times}")
        return self.values[it]

    # ---- CSV ---------------------------------------------------------------
    def to_csv(self, path) -> None:
        label = "s" if self.kind == "continuous" else "state"
        buf = io.StringIO()
        buf.write(f"t,x,{label},p\n")
        for it, t in enumerate(self.times):
            for js, s in enumerate(self.s):
                sv = (_FMT % s) if self.kind == "continuous" else str(int(s))
                for ix, xv in enumerate(self.x):
                    buf.write(f"{_FMT % t},{_FMT % xv},{sv},{_FMT % self.values[it, js, ix]}\n")
        for t, m in zip(self.times, self.masses()):
            buf.write(f"# mass t={_FMT % t} {_FMT % m}\n")
        with open(path, "w", newline="\n") as fh:
            fh.write(buf.getvalue())

    @staticmethod
    def from_csv(path) -> "DensityField":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if header[:2] != ["t", "x"] or header[3:] != ["p"]:
                raise ValueError(f"unrecognized CSV header {header}")
            kind = "continuous" if header[2] == "s" else "discrete"
            rows = []
            for line in fh:
                if line.startswith("#"):
                    continue
                t, x, s, p = line.strip().split(",")
                rows.append((float(t), float(x), float(s), float(p)))
        data = np.array(rows)
        times = np.unique(data[:, 0])
        svals = np.unique(data[:, 2])
        xvals = np.unique(data[:, 1])
        values = np.full((times.size, svals.size, xvals.size), np.nan)
        it = np.searchsorted(times, data[:, 0])
        js = np.searchsorted(svals, data[:, 2])
        ix = np.searchsorted(xvals, data[:, 1])
        values[it, js, ix] = data[:, 3]
        if np.any(np.isnan(values)):
            raise ValueError("CSV is not a full rectangular grid")
        return DensityField(times, xvals, svals, values, kind)


@dataclass(frozen=True)
class CompareReport:
    norm: str
    per_slice: tuple         # rows (t, s_or_state, error, x_at_worst)
    overall: float
    worst: tuple             # (t, s_or_state, x)

    def summary(self) -> str:
        lines = [f"{self.norm} overall = {self.overall:.6e} "
                 f"(worst at t={self.worst[0]}, s={self.worst[1]}, x={self.worst[2]:.4f})"]
        for t, s, err, xw in self.per_slice:
            lines.append(f"  t={t:g} s={s:g}: {err:.6e} at x={xw:.4f}")
        return "\n".join(lines)


def compare_fields(pa: DensityField, pb: DensityField, norm: str = "Linf") -> CompareReport:
    """Norm of the difference per saved time and s-sample/state.

    Fields are aligned by linear interpolation of the finer x-grid onto the
    coarser one; times and s-samples must match.  Disjoint x-grids are an
    error.
    """
    if norm not in ("L1", "Linf"):
        raise ValueError("norm must be 'L1' or 'Linf'")
    if pa.times.size != pb.times.size or np.abs(pa.times - pb.times).max() > 1e-9:
        raise ValueError("fields saved at different times")
    if pa.s.size != pb.s.size:
        raise ValueError("fields have different s-samples/state counts")
    lo = max(pa.x.min(), pb.x.min())
    hi = min(pa.x.max(), pb.x.max())
    if hi <= lo:
        raise ValueError("x-grids are disjoint")
    coarse, fine = (pa, pb) if pa.x.size <= pb.x.size else (pb, pa)
    keep = (coarse.x >= lo) & (coarse.x <= hi)
    xg = coarse.x[keep]
    rows = []
    overall, worst = -np.inf, (None, None, None)
    for it, t in enumerate(pa.times):
        for js in range(pa.s.size):
            u = coarse.values[it, js, keep]
            v = np.interp(xg, fine.x, fine.values[it, js])
            diff = np.abs(u - v)
            if norm == "Linf":
                err = float(diff.max())
                xw = float(xg[int(np.argmax(diff))])
            else:
                err = float(_trapezoid(diff, xg))
                xw = float(xg[int(np.argmax(diff))])
            rows.append((float(t), float(pa.s[js]), err, xw))
            if err > overall:
                overall, worst = err, (float(t), float(pa.s[js]), xw)
    return CompareReport(norm, tuple(rows), overall, worst)
