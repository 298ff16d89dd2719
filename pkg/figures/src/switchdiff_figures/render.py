"""Render publication-style figures from solver density CSVs.

Input is the documented CSV schema emitted by the ``switchdiff`` CLI:

    t,x,s,p          (continuous fields)
    t,x,state,p      (discrete fields)

with optional ``# mass ...`` footer comment lines.  One panel is drawn per
s-sample/state, one curve per time slice, with the caption convention

    earliest time   -> thin solid line
    middle time(s)  -> dots
    latest time     -> thick solid line

Rendering is read-only over its inputs and deterministic: fixed style, no
timestamps or version strings embedded in the output.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "switchdiff-figures"   # deterministic SVG ids
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["CurveSet", "FigureSpec", "read_density_csv", "render",
           "extract_peaks", "panel_layout", "main"]

THIN = dict(linestyle="-", linewidth=0.9, marker="")
DOTS = dict(linestyle="none", marker=".", markersize=2.5)
THICK = dict(linestyle="-", linewidth=2.2, marker="")


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class CurveSet:
    """Density curves p(t, x) per group (s-sample or state) from one CSV."""

    times: np.ndarray
    x: np.ndarray
    groups: np.ndarray          # s-values or state indices
    values: np.ndarray          # (nt, ngroups, nx)
    group_label: str            # "s" or "state"

    def curve(self, t: float, group: float) -> np.ndarray:
        it = _index_of(self.times, t, "time slice")
        jg = _index_of(self.groups, group, self.group_label)
        return self.values[it, jg]


def _index_of(arr: np.ndarray, value: float, what: str) -> int:
    hits = np.where(np.isclose(arr, value, rtol=1e-9, atol=1e-12))[0]
    if hits.size != 1:
        raise KeyError(f"missing {what} {value!r}; available: {list(arr)}")
    return int(hits[0])


def read_density_csv(path) -> CurveSet:
    """Parse the documented solver CSV schema into rectangular arrays."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 4 or header[0] != "t" or header[1] != "x" or header[3] != "p":
            raise SchemaError(f"unrecognized CSV header {header!r}")
        label = header[2]
        if label not in ("s", "state"):
            raise SchemaError(f"third column must be 's' or 'state', got {label!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise SchemaError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            rows.append([float(v) for v in parts])
    if not rows:
        raise SchemaError("CSV contains no data rows")
    data = np.asarray(rows)
    times = np.unique(data[:, 0])
    groups = np.unique(data[:, 2])
    x = np.unique(data[:, 1])
    values = np.full((times.size, groups.size, x.size), np.nan)
    it = np.searchsorted(times, data[:, 0])
    jg = np.searchsorted(groups, data[:, 2])
    ix = np.searchsorted(x, data[:, 1])
    values[it, jg, ix] = data[:, 3]
    if np.any(np.isnan(values)):
        raise SchemaError("CSV is not a full rectangular (t, x, group) grid")
    return CurveSet(times, x, groups, values, label)


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV, groups, time-to-style mapping, output path.

    ``groups``/``times`` = None selects everything in the file; an explicitly
    empty tuple is an error (nothing to draw).
    """

    csv_path: str
    out_path: str
    groups: tuple | None = None
    times: tuple | None = None
    x_range: tuple | None = None
    y_range: tuple | None = None
    title: str = ""


def panel_layout(n_panels: int) -> tuple[int, int]:
    """Panels are laid out row-major: 1x1, 1x2, 2x2 for up to four groups."""
    if n_panels < 1:
        raise ValueError("empty selection: nothing to draw")
    if n_panels == 1:
        return 1, 1
    if n_panels == 2:
        return 1, 2
    if n_panels <= 4:
        return 2, 2
    return int(np.ceil(n_panels / 2)), 2


def _time_styles(times: np.ndarray) -> list[dict]:
    """Caption convention: thin solid, dots..., thick solid."""
    n = times.size
    if n == 1:
        return [dict(THICK)]
    return [dict(THIN)] + [dict(DOTS) for _ in range(n - 2)] + [dict(THICK)]


def render(spec: FigureSpec) -> str:
    """Draw the figure described by ``spec``; returns the written path.

    Raises before writing anything when a referenced time slice or group is
    absent or the selection is empty.
    """
    curves = read_density_csv(spec.csv_path)
    groups = np.asarray(curves.groups if spec.groups is None else spec.groups,
                        dtype=float)
    times = np.asarray(curves.times if spec.times is None else spec.times,
                       dtype=float)
    if groups.size == 0 or times.size == 0:
        raise ValueError("empty selection: nothing to draw")
    panels = [(g, [(t, curves.curve(t, g)) for t in times]) for g in groups]

    nrows, ncols = panel_layout(groups.size)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows),
                             squeeze=False)
    styles = _time_styles(times)
    for k, (g, curve_list) in enumerate(panels):
        ax = axes[k // ncols][k % ncols]
        for (t, y), style in zip(curve_list, styles):
            ax.plot(curves.x, y, color="black", label=f"t = {t:g}", **style)
        name = "state" if curves.group_label == "state" else "s"
        ax.set_xlabel("x")
        ax.set_ylabel("p")
        ax.set_title(f"{name} = {g:g}")
        if spec.x_range:
            ax.set_xlim(*spec.x_range)
        if spec.y_range:
            ax.set_ylim(*spec.y_range)
        ax.legend(frameon=False, fontsize=8)
    for k in range(len(panels), nrows * ncols):
        axes[k // ncols][k % ncols].set_axis_off()
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150, metadata=_strip_metadata(spec.out_path))
    plt.close(fig)
    return spec.out_path


def _strip_metadata(out_path) -> dict:
    suffix = Path(out_path).suffix.lower()
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".svg":
        return {"Date": None, "Creator": None}
    return {}


def extract_peaks(x: np.ndarray, y: np.ndarray, rel_height: float = 0.2) -> list[float]:
    """Locations of local maxima above rel_height * max(y) (curve statistics)."""
    y = np.asarray(y, dtype=float)
    if y.size < 3 or y.max() <= 0:
        return []
    thresh = rel_height * y.max()
    inner = (y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] >= thresh)
    return [float(x[i + 1]) for i in np.where(inner)[0]]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="switchdiff-figures",
                                 description="render density CSVs as figures")
    ap.add_argument("csv", help="input density CSV (t,x,s,p or t,x,state,p)")
    ap.add_argument("--out", required=True, help="output image path (.png/.svg)")
    ap.add_argument("--groups", type=float, nargs="*", default=None,
                    help="s-values or states to plot (default: all)")
    ap.add_argument("--times", type=float, nargs="*", default=None,
                    help="time slices to plot (default: all)")
    ap.add_argument("--title", default="")
    args = ap.parse_args(argv)
    spec = FigureSpec(csv_path=args.csv, out_path=args.out,
                      groups=None if args.groups is None else tuple(args.groups),
                      times=None if args.times is None else tuple(args.times),
                      title=args.title)
    try:
        path = render(spec)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
