"""Parameter sweeps behind the CLI, and CSV/manifest output."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

from . import __version__
from .errors import ConfigError
from .fractional import build_plan, error_norms, frac_apply_inverse, rhs_library, spectral_reference
from .grid import EllipticOperator, GridSpec
from .scalar import QuadratureSpec, ScanSpec, error_scan
from .shifted import SolveConfig

ALPHAS = (0.1, 0.25, 0.5, 0.75, 0.9)
MS = (50, 100, 200)
KAPPAS = (1, 2, 3, 4, 5, 6)


def fmt(value: float) -> str:
    return f"{value:.6e}"


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


@dataclass(frozen=True)
class ScalarCell:
    M: int
    kappa: float
    alpha: float
    max_error: float
    argmax_x: float


def scalar_error_sweep(alphas=ALPHAS, Ms=MS, kappas=KAPPAS, rule="midpoint", repr="eq22",
                       scan: ScanSpec | None = None, threads: int = 1) -> list[ScalarCell]:
    """Maximal scalar error for every ``(M, kappa, alpha)`` combination."""
    scan = scan or ScanSpec()
    combos = sorted(product(Ms, kappas, alphas))
    specs = []
    for M, kappa, alpha in combos:
        try:
            specs.append(QuadratureSpec.make(alpha, M, kappa, rule, repr))
        except ConfigError as exc:
            raise ConfigError(f"M={M}, kappa={kappa}, alpha={alpha}: {exc}") from None

    def run(q):
        rep = error_scan(q, scan)
        return ScalarCell(q.M, q.representation.kappa, q.alpha, rep.max_error, rep.argmax_x)

    return _map(run, specs, threads)


@dataclass(frozen=True)
class PdeCell:
    M: int
    alpha: float
    eps: float
    eps_inf: float
    umax: float
    delta: float
    iterations: int


def pde_error_sweep(rhs="sgn", alphas=ALPHAS, Ms=MS, rule="midpoint", kappa=None, N=256,
                    method="auto", scaling="auto", threads: int = 1) -> list[PdeCell]:
    """Relative solution errors against the spectral reference."""
    grid = GridSpec.square(N)
    op = EllipticOperator(grid)
    b = rhs_library(rhs, grid)
    cfg = SolveConfig(method=method)
    refs = {alpha: spectral_reference(op, b, alpha) for alpha in alphas}

    def run(combo):
        M, alpha = combo
        res = frac_apply_inverse(op, b, build_plan(alpha, rule, M, kappa), cfg, scaling)
        eps, eps_inf = error_norms(res.u, refs[alpha])
        return PdeCell(M, alpha, eps, eps_inf, float(refs[alpha].values.max()), res.delta,
                       res.total_solver_iterations)

    return _map(run, sorted(product(Ms, alphas)), threads)


@dataclass(frozen=True)
class TableDef:
    kind: str  # "scalar" or "pde"
    rule: str
    repr: str = "eq22"
    rhs: str | None = None
    kappa: float | None = None
    title: str = ""


TABLES = {
    1: TableDef("scalar", "midpoint", "eq22", title="max scalar error, midpoint rule, eq22"),
    2: TableDef("scalar", "midpoint", "eq23", title="max scalar error, midpoint rule, eq23"),
    3: TableDef("scalar", "simpson", "eq22", title="max scalar error, Simpson rule, eq22"),
    4: TableDef("pde", "midpoint", rhs="sgn", kappa=3, title="solution error, sgn rhs, midpoint"),
    5: TableDef("pde", "simpson", rhs="sgn", kappa=5, title="solution error, sgn rhs, Simpson"),
    6: TableDef("pde", "simpson", rhs="xy", kappa=5, title="solution error, x1*x2 rhs, Simpson"),
    7: TableDef("pde", "simpson", rhs="bubble", kappa=5, title="solution error, bubble rhs, Simpson"),
}


def table_rows(table_id: int, N: int = 256, scan: ScanSpec | None = None, threads: int = 1,
               alphas=ALPHAS, Ms=MS, kappas=KAPPAS):
    """Header and rows of a table in the ``M x (kappa | error) x alpha`` layout."""
    if table_id not in TABLES:
        raise ConfigError(f"unknown table {table_id}; choose from {sorted(TABLES)}")
    t = TABLES[table_id]
    alpha_cols = [f"alpha={a:g}" for a in alphas]
    if t.kind == "scalar":
        cells = scalar_error_sweep(alphas, Ms, kappas, t.rule, t.repr, scan, threads)
        lookup = {(c.M, c.kappa, c.alpha): c.max_error for c in cells}
        header = ["M", "kappa", *alpha_cols]
        rows = [
            [str(M), f"{k:g}", *(fmt(lookup[(M, float(k), a)]) for a in alphas)]
            for M in Ms for k in kappas
        ]
        return header, rows
    cells = pde_error_sweep(t.rhs, alphas, Ms, t.rule, t.kappa, N, threads=threads)
    lookup = {(c.M, c.alpha): c for c in cells}
    header = ["M", "error", *alpha_cols]
    rows = []
    for M in Ms:
        rows.append([str(M), "eps", *(fmt(lookup[(M, a)].eps) for a in alphas)])
        rows.append([str(M), "eps_inf", *(fmt(lookup[(M, a)].eps_inf) for a in alphas)])
    return header, rows


def manifest(command: str, argv: list[str], **params) -> dict:
    """Self-description embedded in every output file."""
    return {
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def render_csv(header, rows, meta: dict | None = None) -> str:
    """CSV text, preceded by a single ``# manifest: {...}`` comment line."""
    buf = io.StringIO()
    if meta is not None:
        buf.write("# manifest: " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def read_manifest(text: str) -> dict | None:
    first = text.splitlines()[0] if text else ""
    if first.startswith("# manifest: "):
        return json.loads(first[len("# manifest: "):])
    return None


def csv_body(text: str) -> str:
    """The CSV without its manifest line."""
    return "".join(line for line in text.splitlines(True) if not line.startswith("#"))

