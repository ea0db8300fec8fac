"""Solvers for the shifted systems ``(gamma A + beta I) w = r``.

Two methods are available:

``cg``
    Unpreconditioned conjugate gradients, matrix free, any coefficients.
``fast``
    Diagonalisation by the orthonormal type-I discrete sine transform.
    Exact up to roundoff, constant coefficients only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dstn

from .errors import ConfigError, ConvergenceFailure
from .grid import EllipticOperator, GridFunction


class Method(str, enum.Enum):
    AUTO = "auto"  # FAST for constant coefficients, CG otherwise
    CG = "cg"
    FAST = "fast"


@dataclass(frozen=True)
class ShiftedSystem:
    op: EllipticOperator
    gamma: float
    beta: float

    def __post_init__(self):
        g, b = float(self.gamma), float(self.beta)
        if g < 0 or b < 0 or g + b <= 0:
            raise ConfigError(f"need gamma, beta >= 0 and not both zero (got {g}, {b})")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.beta * u
        if self.gamma:
            out += self.gamma * self.op.apply_array(u)
        return out

    def apply(self, u: GridFunction) -> GridFunction:
        return GridFunction(u.grid, self.matvec(u.values))


@dataclass(frozen=True)
class SolveConfig:
    """``max_iter=None`` means ``10 * sqrt(K)``."""

    method: Method = Method.AUTO
    rel_tol: float = 1e-12
    max_iter: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigError("max_iter must be positive")

    def iteration_limit(self, K: int) -> int:
        if self.max_iter is not None:
            return int(self.max_iter)
        return max(1, int(math.ceil(10 * math.sqrt(K))))


@dataclass(frozen=True)
class SolveInfo:
    iterations: int
    residual: float  # relative, ||r - S w|| / ||r||


def dst2(values: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DST-I; symmetric and its own inverse."""
    return dstn(values, type=1, norm="ortho")


def conjugate_gradient(matvec, b: np.ndarray, rel_tol: float, max_iter: int):
    """Plain CG from a zero initial guess.

    Returns ``(x, iterations, relative_residual)``.  When the recursive
    residual meets the tolerance the true residual is recomputed, and the
    iteration restarts from it if roundoff has let the two drift apart.
    """
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    target = rel_tol * bnorm
    r = b.copy()
    p = r.copy()
    rr = r @ r
    it = 0
    while it < max_iter:
        Ap = matvec(p)
        step = rr / (p @ Ap)
        x += step * p
        r -= step * Ap
        it += 1
        rr_new = r @ r
        if math.sqrt(rr_new) <= target:
            r = b - matvec(x)
            rr_new = r @ r
            if math.sqrt(rr_new) <= target:
                return x, it, math.sqrt(rr_new) / bnorm
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = np.linalg.norm(b - matvec(x)) / bnorm
    raise ConvergenceFailure(
        f"CG did not reach rel_tol={rel_tol:g} in {max_iter} iterations "
        f"(relative residual {res:.3e})",
        iterations=it,
        residual=res,
    )


def solve_with_info(sys: ShiftedSystem, r: GridFunction, cfg: SolveConfig | None = None):
    """Like `solve` but also returns a `SolveInfo`."""
    cfg = cfg or SolveConfig()
    op = sys.op
    if r.grid != op.grid:
        raise ConfigError("right-hand side and operator live on different grids")
    if not np.any(r.values):
        return GridFunction.zeros(r.grid), SolveInfo(0, 0.0)
    if sys.gamma == 0.0:
        return r / sys.beta, SolveInfo(0, 0.0)
    method = cfg.method
    if method is Method.AUTO:
        method = Method.FAST if op.is_constant else Method.CG
    if method is Method.FAST:
        if not op.is_constant:
            raise ConfigError("fast diagonalisation needs constant coefficients")
        spectrum = sys.gamma * op.eigenvalues() + sys.beta
        w = dst2(dst2(r.as_array()) / spectrum)
        return GridFunction(r.grid, w), SolveInfo(0, float("nan"))
    x, it, res = conjugate_gradient(
        sys.matvec, r.values.copy(), cfg.rel_tol, cfg.iteration_limit(r.grid.K)
    )
    return GridFunction(r.grid, x), SolveInfo(it, res)


def solve(sys: ShiftedSystem, r: GridFunction, cfg: SolveConfig | None = None) -> GridFunction:
    """Solve ``(gamma A + beta I) w = r``."""
    return solve_with_info(sys, r, cfg)[0]
