"""Command-line entry point.

Subcommands:

    solve          run one solver on a scenario, write the density CSV
    compare        run two solvers, report the error norms (exit 2 over --tol)
    reproduce-fig  emit the fig1/fig2/fig3 preset CSVs
    validate       q-property / invariant report (exit 1 on failure)

Exit codes: 0 ok, 1 validation failure, 2 numerical-tolerance failure,
3 I/O or parse error.  Flags override config keys.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .basis import OrthonormalBasis, project_kernel
from .fields import compare_fields
from .scenario import (ConfigError, ValidationFailure, load_scenario, preset,
                       run_scenario, write_artifacts)
from .spectral import check_spectral_radius

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3


def _add_scenario_args(p: argparse.ArgumentParser, need_source: bool = True):
    src = p.add_mutually_exclusive_group(required=need_source)
    src.add_argument("--config", help="flat key = value scenario file")
    src.add_argument("--preset", choices=["fig1", "fig2", "fig3"],
                     help="published-figure scenario")
    p.add_argument("--solver", choices=["spectral", "closed_form", "fd", "mc"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--grid-nx", type=int, dest="grid_nx")
    p.add_argument("--mu-max", type=float, dest="mu_max")
    p.add_argument("--paths", type=int)
    p.add_argument("--dx", type=float, dest="grid_dx")


def _scenario_from(args, **extra):
    overrides = {k: getattr(args, k) for k in
                 ("solver", "seed", "out", "grid_nx", "mu_max", "paths", "grid_dx")
                 if getattr(args, k, None) is not None}
    overrides.update(extra)
    if args.config:
        return load_scenario(args.config, overrides)
    sc = preset(args.preset)
    if overrides:
        from dataclasses import replace
        sc = replace(sc, **overrides)
    return sc


def _in_field_units(fld, solver: str, n_states: int):
    """MC histograms are probability-normalized; rescale to field units."""
    if solver != "mc":
        return fld
    from dataclasses import replace
    return replace(fld, values=fld.values * n_states)


def cmd_solve(args) -> int:
    sc = _scenario_from(args)
    fld, artifacts = run_scenario(sc)
    written = write_artifacts(sc, fld, artifacts, out=args.out)
    masses = ", ".join("%.12g" % m for m in fld.masses())
    print(f"solver={sc.solver} times={list(sc.times)} -> {', '.join(written)}")
    print(f"mass per slice: {masses}; min density: {fld.min_value():.3e}")
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _scenario_from(args)
    n = sc.dm.n_states
    results = {}
    for solver in (args.a, args.b):
        from dataclasses import replace
        fld, _ = run_scenario(replace(sc, solver=solver))
        results[solver] = _in_field_units(fld, solver, n)
    report = compare_fields(results[args.a], results[args.b], norm=args.norm)
    print(report.summary())
    if args.tol is not None and report.overall > args.tol:
        print(f"FAIL: {report.norm} = {report.overall:.6e} > tol {args.tol:.6e}")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_reproduce_fig(args) -> int:
    sc = preset(f"fig{args.n}")
    if args.solver:
        from dataclasses import replace
        sc = replace(sc, solver=args.solver)
    if args.seed is not None:
        from dataclasses import replace
        sc = replace(sc, seed=args.seed)
    fld, artifacts = run_scenario(sc)
    out = args.out or f"fig{args.n}.csv"
    written = write_artifacts(sc, fld, artifacts, out=out)
    print(f"wrote {', '.join(written)} (times {list(sc.times)})")
    return EXIT_OK


def cmd_bounds(args) -> int:
    from .closed_form import TwoStateParams, export_bounds_csv
    sc = _scenario_from(args)
    dm = sc.dm
    if dm.n_states != 2:
        raise ValidationFailure("bounds require a two-state model")
    if not np.all(dm.b < 0):
        raise ValidationFailure("bounds require b < 0 in both states")
    if dm.c[0] != dm.c[1]:
        raise ValidationFailure("bounds require a uniform drift offset c")
    p = TwoStateParams(l1=dm.q[0, 1], l2=dm.q[1, 0], r1=dm.sigma[0], r2=dm.sigma[1],
                       b1=dm.b[0], b2=dm.b[1], c=dm.c[0])
    x = sc.x_grid()
    out = args.out or sc.out
    export_bounds_csv(p, list(sc.times), x, [0.25, 0.75], out)
    print(f"wrote {out} (times {list(sc.times)})")
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = _scenario_from(args)
    dm_rep = sc.dm.validate()
    cm = None
    lines = ["discrete model:", dm_rep.summary()]
    ok = dm_rep.passed
    if ok:
        cm = sc.continuous()
        cm_rep = cm.validate()
        lines += ["continuous embedding:", cm_rep.summary()]
        ok = ok and cm_rep.passed
        a = project_kernel(cm.kernel, OrthonormalBasis("haar", sc.dm.n_states))
        eig = check_spectral_radius(a)
        lines.append(f"mode-matrix minor eigenvalues: "
                     + ", ".join(f"{z.real:+.6g}{z.imag:+.6g}j" for z in np.atleast_1d(eig)))
    print("\n".join(lines))
    if not ok:
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchdiff",
                                 description="Forward-equation solvers for "
                                             "regime-switching diffusions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver, write CSV")
    _add_scenario_args(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("compare", help="run two solvers and compare")
    _add_scenario_args(p)
    p.add_argument("--a", required=True, choices=["spectral", "closed_form", "fd", "mc"])
    p.add_argument("--b", required=True, choices=["spectral", "closed_form", "fd", "mc"])
    p.add_argument("--norm", choices=["L1", "Linf"], default="Linf")
    p.add_argument("--tol", type=float)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("reproduce-fig", help="emit a published-figure preset CSV")
    p.add_argument("n", type=int, choices=[1, 2, 3])
    p.add_argument("--out")
    p.add_argument("--solver", choices=["spectral", "closed_form", "fd", "mc"])
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_reproduce_fig)

    p = sub.add_parser("bounds", help="emit the envelope CSV (t,x,s,lower,upper) "
                                      "for a two-state b < 0 scenario")
    _add_scenario_args(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("validate", help="model invariant report")
    _add_scenario_args(p)
    p.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
