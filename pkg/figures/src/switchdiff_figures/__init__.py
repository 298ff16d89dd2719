"""Figure rendering for switchdiff density CSVs (consumes the CSV schema only)."""

from .render import (CurveSet, FigureSpec, extract_peaks, panel_layout,
                     read_density_csv, render)

__version__ = "0.1.0"
