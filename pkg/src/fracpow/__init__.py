"""Quadrature approximations of fractional powers of elliptic operators."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceFailure, DomainError, FracPowError
from .fractional import (
    FracSolveResult,
    OperatorQuadraturePlan,
    build_plan,
    error_norms,
    frac_apply_inverse,
    normalized_solution,
    rhs_library,
    spectral_reference,
)
from .grid import (
    EllipticCoeffs,
    EllipticOperator,
    GridFunction,
    GridSpec,
    min_eigenvalue,
    normalize,
)
from .scalar import (
    ErrorReport,
    QuadratureSpec,
    Representation,
    Rule,
    ScanSpec,
    Tag,
    approx_frac_power,
    error_scan,
    integrand_eq17,
    integrand_eq18,
    integrand_eq19,
    integrand_eq22,
    integrand_eq23,
)
from .shifted import Method, ShiftedSystem, SolveConfig, solve
