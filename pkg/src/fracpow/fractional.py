"""Approximate ``u = A**(-alpha) b`` by a weighted sum of shifted solves.

A quadrature rule applied to a finite-interval representation of
``x**(-alpha)`` gives

    x**(-alpha) ~ sum_i w_i / (gamma_i x + beta_i),

and replacing ``x`` by the grid operator turns each term into one shifted
solve.  The exact discrete solution used as a reference comes from the
eigen-expansion of the operator.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, ConvergenceFailure, DomainError
from .grid import EllipticOperator, GridFunction, GridSpec, min_eigenvalue
from .scalar import (
    QuadratureSpec,
    Rule,
    Tag,
    check_alpha,
    eq22_density,
    eq22_shifts,
    eq23_terms,
)
from .shifted import ShiftedSystem, SolveConfig, dst2, solve_with_info

DEFAULT_KAPPA = {Rule.MIDPOINT: 3.0, Rule.SIMPSON: 5.0}
DENSE_LIMIT = 10_000


@dataclass(frozen=True)
class OperatorQuadraturePlan:
    """Quadrature nodes turned into shifted-system data.

    Node ``i`` contributes ``weight[i] * (gamma[i] A + beta[i] I)**-1``.
    For ``eq23`` every ``t`` yields two nodes.  The node list depends only
    on ``(alpha, rule, M, kappa)``, never on the grid.
    """

    quadrature: QuadratureSpec
    t: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    @property
    def alpha(self) -> float:
        return self.quadrature.alpha

    def __len__(self):
        return len(self.weight)

    def active(self) -> np.ndarray:
        """Indices of nodes with a non-zero weight."""
        return np.flatnonzero(self.weight)

    def scalar_sum(self, x):
        """``sum_i w_i / (gamma_i x + beta_i)``, the plan applied to numbers."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for w, g, b in zip(self.weight, self.gamma, self.beta):
            acc = acc + w / (g * x + b)
        return acc if acc.ndim else float(acc)


def build_plan(alpha: float, rule="midpoint", M: int = 100, kappa: float | None = None,
               repr: str = "eq22") -> OperatorQuadraturePlan:
    """Nodes, weights and shifts for ``A**(-alpha)``.

    ``kappa`` defaults to 3 for the midpoint rule and 5 for Simpson's rule.
    """
    rule = Rule.parse(rule)
    if kappa is None:
        kappa = DEFAULT_KAPPA[rule]
    q = QuadratureSpec.make(alpha, M, kappa, rule, repr)
    rep = q.representation
    t, wq = q.nodes()
    if rep.tag is Tag.EQ22:
        density = eq22_density(t, rep.alpha, rep.sigma)
        gamma, beta = eq22_shifts(t, rep.alpha, rep.sigma)
        return OperatorQuadraturePlan(q, t, wq * density, gamma, beta)
    terms = eq23_terms(t, rep.alpha, rep.sigma)
    # interleave the two terms so nodes stay in ascending t
    ts = np.repeat(t, 2)
    weight = np.empty(2 * len(t))
    gamma = np.empty_like(weight)
    beta = np.empty_like(weight)
    for j, (density, g, b) in enumerate(terms):
        weight[j::2] = wq * density
        gamma[j::2] = g
        beta[j::2] = b
    return OperatorQuadraturePlan(q, ts, weight, gamma, beta)


@dataclass
class FracSolveResult:
    u: GridFunction
    delta: float
    node_count: int
    total_solver_iterations: int
    wall_time: float
    plan: OperatorQuadraturePlan | None = None

    def metadata(self) -> dict:
        q = self.plan.quadrature if self.plan is not None else None
        meta = {
            "grid": self.u.grid.to_dict(),
            "delta": self.delta,
            "node_count": self.node_count,
            "iterations": self.total_solver_iterations,
            "wall_time": self.wall_time,
        }
        if q is not None:
            meta.update(
                alpha=q.alpha,
                rule=q.rule.value,
                M=q.M,
                kappa=q.representation.kappa,
                repr=q.representation.tag.value,
            )
        return meta


def scaling_delta(op: EllipticOperator, scaling="auto") -> float:
    """Pick the ``delta`` that maps ``A`` to ``A / delta >= I``.

    ``"auto"``
        ``min(1, mu_1)``: rescale only when ``A >= I`` does not already hold.
    ``"eigenvalue"``
        ``mu_1`` (or its certified lower bound), so that ``A / delta`` has
        smallest eigenvalue one.
    a number
        used as is; it must not exceed ``mu_1``.
    """
    mu1 = min_eigenvalue(op)
    if not mu1 > 0:
        raise DomainError(f"operator is not positive definite (mu_1 bound {mu1})")
    if scaling == "auto":
        return min(1.0, mu1)
    if scaling == "eigenvalue":
        return mu1
    delta = float(scaling)
    if not 0 < delta <= mu1 * (1 + 1e-12):
        raise ConfigError(f"delta={delta} does not give A/delta >= I (mu_1={mu1})")
    return delta


def frac_apply_inverse(op: EllipticOperator, b: GridFunction, plan: OperatorQuadraturePlan,
                       cfg: SolveConfig | None = None, scaling="auto",
                       workers: int = 1) -> FracSolveResult:
    """``u = delta**(-alpha) sum_i w_i (gamma_i A/delta + beta_i I)**-1 b``.

    Node solves may run on ``workers`` threads; contributions are always
    accumulated in ascending node order so the result does not depend on
    scheduling.
    """
    alpha = check_alpha(plan.alpha)
    cfg = cfg or SolveConfig()
    start = time.perf_counter()
    delta = scaling_delta(op, scaling)
    op_n = op.scaled(1.0 / delta) if delta != 1.0 else op
    rhs = b * delta ** (-alpha)
    nodes = plan.active()

    def node_solve(i):
        sys = ShiftedSystem(op_n, plan.gamma[i], plan.beta[i])
        try:
            return solve_with_info(sys, rhs, cfg)
        except ConvergenceFailure as exc:
            exc.node = int(i)
            exc.args = (f"node {i} (t={plan.t[i]:.6g}): {exc.args[0]}",)
            raise

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(node_solve, nodes))
    else:
        results = [node_solve(i) for i in nodes]

    acc = np.zeros(b.grid.K)
    iterations = 0
    for i, (w, info) in zip(nodes, results):
        acc += plan.weight[i] * w.values
        iterations += info.iterations
    return FracSolveResult(
        u=GridFunction(b.grid, acc),
        delta=delta,
        node_count=len(nodes),
        total_solver_iterations=iterations,
        wall_time=time.perf_counter() - start,
        plan=plan,
    )


def spectral_reference(op: EllipticOperator, b: GridFunction, alpha: float,
                       method: str = "auto") -> GridFunction:
    """Exact discrete ``A**(-alpha) b`` from the eigen-expansion.

    ``method`` is ``"fast"`` (sine transform, constant coefficients),
    ``"dense"`` (symmetric eigendecomposition, at most 10**4 unknowns) or
    ``"auto"``.  ``alpha = 1`` is accepted and gives the plain inverse.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if method == "auto":
        method = "fast" if op.is_constant else "dense"
    if method == "fast":
        if not op.is_constant:
            raise ConfigError("the sine-transform reference needs constant coefficients")
        mu = op.eigenvalues()
        return GridFunction(b.grid, dst2(dst2(b.as_array()) * mu ** (-alpha)))
    if method == "dense":
        if b.grid.K > DENSE_LIMIT:
            raise ConfigError(f"dense reference limited to K <= {DENSE_LIMIT}, got {b.grid.K}")
        mu, psi = scipy.linalg.eigh(op.assemble().toarray())
        return GridFunction(b.grid, psi @ ((psi.T @ b.values) * mu ** (-alpha)))
    raise ConfigError(f"unknown reference method {method!r}")


RHS_NAMES = ("sgn", "xy", "bubble")


def rhs_library(name: str, grid: GridSpec) -> GridFunction:
    """Right-hand sides of the model problems, sampled at interior nodes.

    ``sgn``: ``sgn(x1 - 0.5) sgn(x2 - 0.5)`` with ``sgn(0) = 0``;
    ``xy``: ``x1 x2``; ``bubble``: ``x1 (1 - x1) x2 (1 - x2)``.
    """
    X1, X2 = grid.coordinates()
    if name == "sgn":
        values = np.sign(X1 - 0.5) * np.sign(X2 - 0.5)
    elif name == "xy":
        values = X1 * X2
    elif name == "bubble":
        values = X1 * (1 - X1) * X2 * (1 - X2)
    else:
        raise ConfigError(f"unknown right-hand side {name!r}; choose from {RHS_NAMES}")
    return GridFunction(grid, values)


def error_norms(w: GridFunction, u_ref: GridFunction) -> tuple[float, float]:
    """Relative grid-L2 and max-norm errors of ``w`` against ``u_ref``."""
    if w.grid != u_ref.grid:
        raise ConfigError("grid functions live on different grids")
    ref2, refinf = u_ref.norm(), u_ref.max_norm()
    if ref2 == 0.0:
        raise ZeroDivisionError("reference solution is identically zero")
    diff = w - u_ref
    return diff.norm() / ref2, diff.max_norm() / refinf


def normalized_solution(u: GridFunction) -> tuple[GridFunction, float]:
    """``(u / max u, max u)``; needs ``max u > 0``."""
    umax = float(np.max(u.values))
    if not umax > 0:
        raise DomainError(f"max u must be positive, got {umax}")
    return u / umax, umax


def mode_response(alpha: float, plan: OperatorQuadraturePlan, mu: float, delta: float = 1.0) -> float:
    """Scalar factor the plan applies to an eigenvector with eigenvalue ``mu``."""
    return delta ** (-alpha) * plan.scalar_sum(mu / delta)


__all__ = [
    "DEFAULT_KAPPA",
    "FracSolveResult",
    "OperatorQuadraturePlan",
    "RHS_NAMES",
    "build_plan",
    "error_norms",
    "frac_apply_inverse",
    "mode_response",
    "normalized_solution",
    "rhs_library",
    "scaling_delta",
    "spectral_reference",
]
