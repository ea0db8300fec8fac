"""Command line front end.

Subcommands::

    fracpow scalar-error   max |r(x) - x**-alpha| over a scan, per (M, kappa, alpha)
    fracpow scalar-curve   the error curve for one parameter set
    fracpow solve          one fractional solve on the unit square, with dumps and metrics
    fracpow table ID       rerun the sweep behind table ID (1-7)

CSV goes to ``--out`` or stdout.  The first line of every CSV is a
``# manifest: {...}`` comment whose ``argv`` reproduces the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import FracPowError
from .fractional import (
    RHS_NAMES,
    build_plan,
    error_norms,
    frac_apply_inverse,
    normalized_solution,
    rhs_library,
    spectral_reference,
)
from .grid import EllipticOperator, GridSpec
from .reporting import (
    ALPHAS,
    KAPPAS,
    MS,
    TABLES,
    fmt,
    manifest,
    render_csv,
    scalar_error_sweep,
    table_rows,
)
from .scalar import QuadratureSpec, Rule, ScanSpec, error_scan
from .shifted import SolveConfig


def _rule(text: str) -> str:
    return Rule.parse(text).value


def _add_scan(p, xmax):
    p.add_argument("--xmin", type=float, default=1.0)
    p.add_argument("--xmax", type=float, default=xmax)
    p.add_argument("--samples-per-decade", type=int, default=100)


def _add_common(p):
    p.add_argument("--out", type=Path, help="output path (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracpow", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scalar-error", help="maximal scalar approximation error")
    p.add_argument("--alpha", type=float, action="append")
    p.add_argument("--M", type=int, action="append")
    p.add_argument("--kappa", type=float, action="append")
    p.add_argument("--rule", type=_rule, default="midpoint", help="rect|midpoint|simpson")
    p.add_argument("--repr", choices=["eq22", "eq23"], default="eq22")
    _add_scan(p, 1e20)
    _add_common(p)

    p = sub.add_parser("scalar-curve", help="scalar error curve for one parameter set")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--rule", type=_rule, default="midpoint")
    p.add_argument("--repr", choices=["eq22", "eq23"], default="eq22")
    _add_scan(p, 1e10)
    _add_common(p)

    p = sub.add_parser("solve", help="approximate A**-alpha b on the unit square")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--kappa", type=float, help="default 3 (midpoint) or 5 (simpson)")
    p.add_argument("--rule", type=_rule, default="midpoint")
    p.add_argument("--repr", choices=["eq22", "eq23"], default="eq22")
    p.add_argument("--grid", type=int, default=256, help="N1 = N2")
    p.add_argument("--rhs", choices=RHS_NAMES, default="sgn")
    p.add_argument("--method", choices=["auto", "cg", "fast"], default="auto")
    p.add_argument("--scaling", default="auto", help="auto|eigenvalue|<delta>")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("table", help="rerun the sweep behind one of the error tables")
    p.add_argument("table_id", type=int, choices=sorted(TABLES))
    p.add_argument("--grid", type=int, default=256, help="N1 = N2 for tables 4-7")
    _add_scan(p, 1e20)
    _add_common(p)
    return parser


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _scan(args) -> ScanSpec:
    return ScanSpec(x_max=args.xmax, x_min=args.xmin, samples_per_decade=args.samples_per_decade)


def _scan_argv(args) -> list[str]:
    return ["--xmin", repr(args.xmin), "--xmax", repr(args.xmax),
            "--samples-per-decade", str(args.samples_per_decade)]


def cmd_scalar_error(args) -> int:
    alphas = args.alpha or list(ALPHAS)
    Ms = args.M or list(MS)
    kappas = args.kappa or [float(k) for k in KAPPAS]
    scan = _scan(args)
    cells = scalar_error_sweep(alphas, Ms, kappas, args.rule, args.repr, scan, args.threads)
    argv = ["scalar-error"]
    for flag, values in (("--alpha", alphas), ("--M", Ms), ("--kappa", kappas)):
        for v in values:
            argv += [flag, repr(v)]
    argv += ["--rule", args.rule, "--repr", args.repr, *_scan_argv(args)]
    meta = manifest("scalar-error", argv, alphas=alphas, Ms=Ms, kappas=kappas,
                    rule=args.rule, repr=args.repr, xmin=args.xmin, xmax=args.xmax,
                    samples_per_decade=args.samples_per_decade)
    rows = [[str(c.M), f"{c.kappa:g}", f"{c.alpha:g}", fmt(c.max_error), fmt(c.argmax_x)]
            for c in cells]
    _emit(render_csv(["M", "kappa", "alpha", "max_error", "argmax_x"], rows, meta), args.out)
    return 0


def cmd_scalar_curve(args) -> int:
    q = QuadratureSpec.make(args.alpha, args.M, args.kappa, args.rule, args.repr)
    report = error_scan(q, _scan(args))
    argv = ["scalar-curve", "--alpha", repr(args.alpha), "--M", str(args.M),
            "--kappa", repr(args.kappa), "--rule", args.rule, "--repr", args.repr,
            *_scan_argv(args)]
    meta = manifest("scalar-curve", argv, alpha=args.alpha, M=args.M, kappa=args.kappa,
                    rule=args.rule, repr=args.repr, xmin=args.xmin, xmax=args.xmax,
                    samples_per_decade=args.samples_per_decade,
                    max_error=report.max_error, argmax_x=report.argmax_x)
    rows = [[fmt(x), fmt(e)] for x, e in zip(report.x, report.errors)]
    _emit(render_csv(["x", "error"], rows, meta), args.out)
    return 0


def cmd_solve(args) -> int:
    grid = GridSpec.square(args.grid)
    op = EllipticOperator(grid)
    b = rhs_library(args.rhs, grid)
    plan = build_plan(args.alpha, args.rule, args.M, args.kappa, args.repr)
    scaling = args.scaling if args.scaling in ("auto", "eigenvalue") else float(args.scaling)
    result = frac_apply_inverse(op, b, plan, SolveConfig(method=args.method), scaling,
                                workers=args.threads)
    ref = spectral_reference(op, b, args.alpha)
    eps, eps_inf = error_norms(result.u, ref)
    y, umax = normalized_solution(result.u)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    result.u.save(out / "u.csv")
    y.save(out / "y.csv")
    kappa = plan.quadrature.representation.kappa
    argv = ["solve", "--alpha", repr(args.alpha), "--M", str(args.M), "--kappa", repr(kappa),
            "--rule", args.rule, "--repr", args.repr, "--grid", str(args.grid),
            "--rhs", args.rhs, "--method", args.method, "--scaling", str(args.scaling)]
    metrics = dict(
        result.metadata(),
        eps=eps,
        eps_inf=eps_inf,
        umax=umax,
        umax_reference=float(np.max(ref.values)),
        rhs=args.rhs,
        manifest=manifest("solve", argv, alpha=args.alpha, M=args.M, kappa=kappa,
                          rule=args.rule, repr=args.repr, grid=args.grid, rhs=args.rhs,
                          method=args.method, scaling=args.scaling),
    )
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps({k: metrics[k] for k in ("eps", "eps_inf", "umax", "delta")}) + "\n")
    return 0


def cmd_table(args) -> int:
    header, rows = table_rows(args.table_id, N=args.grid, scan=_scan(args), threads=args.threads)
    argv = ["table", str(args.table_id), "--grid", str(args.grid), *_scan_argv(args)]
    t = TABLES[args.table_id]
    meta = manifest("table", argv, table_id=args.table_id, title=t.title, rule=t.rule,
                    repr=t.repr, rhs=t.rhs, kappa=t.kappa, grid=args.grid,
                    xmin=args.xmin, xmax=args.xmax, samples_per_decade=args.samples_per_decade)
    _emit(render_csv(header, rows, meta), args.out)
    return 0


COMMANDS = {
    "scalar-error": cmd_scalar_error,
    "scalar-curve": cmd_scalar_curve,
    "solve": cmd_solve,
    "table": cmd_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (FracPowError, ValueError, ZeroDivisionError) as exc:
        print(f"fracpow {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
