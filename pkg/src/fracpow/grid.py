"""Uniform rectangular grid and the five-point elliptic operator on it.

Grid functions live on the interior nodes ``x = (i1 h1, i2 h2)``,
``1 <= i_n <= N_n - 1``, and vanish on the boundary.  Values are stored
row-major over ``(i2, i1)`` with ``i1`` fastest, i.e. a 2-D view has shape
``(N2 - 1, N1 - 1)``.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError

LAYOUT = "row-major (i2, i1), i1 fastest, interior nodes only"

Field = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class GridSpec:
    """Rectangle ``(0, l1) x (0, l2)`` split into ``N1 x N2`` cells."""

    N1: int
    N2: int
    l1: float = 1.0
    l2: float = 1.0

    def __post_init__(self):
        for name in ("N1", "N2"):
            n = getattr(self, name)
            if int(n) != n or n < 2:
                raise ConfigError(f"{name} must be an integer >= 2, got {n}")
            object.__setattr__(self, name, int(n))
        if not (self.l1 > 0 and self.l2 > 0):
            raise ConfigError("side lengths must be positive")

    @classmethod
    def square(cls, N: int, length: float = 1.0) -> "GridSpec":
        return cls(N, N, length, length)

    @property
    def h1(self) -> float:
        return self.l1 / self.N1

    @property
    def h2(self) -> float:
        return self.l2 / self.N2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N2 - 1, self.N1 - 1)

    @property
    def K(self) -> int:
        return (self.N1 - 1) * (self.N2 - 1)

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    def coordinates(self):
        """``(X1, X2)`` arrays of interior node coordinates, each of `shape`."""
        x1 = np.arange(1, self.N1) * self.h1
        x2 = np.arange(1, self.N2) * self.h2
        return np.meshgrid(x1, x2, indexing="xy")

    def to_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "N1": self.N1, "N2": self.N2}


class GridFunction:
    """Immutable values on the interior nodes of a grid.

    Supports ``+``, ``-`` and multiplication by scalars.  The inner product is
    the grid one, ``(u, w) = sum u w h1 h2``.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values):
        values = np.array(values, dtype=float)
        if values.shape == grid.shape:
            values = values.reshape(-1)
        if values.shape != (grid.K,):
            raise ConfigError(
                f"grid function needs {grid.K} values (or shape {grid.shape}), "
                f"got shape {values.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "GridFunction":
        return cls(grid, np.zeros(grid.K))

    @classmethod
    def from_callable(cls, grid: GridSpec, f) -> "GridFunction":
        X1, X2 = grid.coordinates()
        return cls(grid, np.broadcast_to(f(X1, X2), grid.shape))

    def as_array(self) -> np.ndarray:
        """Read-only 2-D view of shape ``(N2 - 1, N1 - 1)``."""
        return self.values.reshape(self.grid.shape)

    def _check_same_grid(self, other: "GridFunction"):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise ConfigError("grid functions live on different grids")
        return None

    def inner(self, other: "GridFunction") -> float:
        self._check_same_grid(other)
        return float(self.values @ other.values) * self.grid.cell_area

    def norm(self) -> float:
        return math.sqrt(self.inner(self))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        if self._check_same_grid(other) is NotImplemented:
            return NotImplemented
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        if self._check_same_grid(other) is NotImplemented:
            return NotImplemented
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        if not isinstance(scalar, numbers.Real):
            return NotImplemented
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, numbers.Real):
            return NotImplemented
        return GridFunction(self.grid, self.values / float(scalar))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __repr__(self):
        g = self.grid
        return f"GridFunction(N1={g.N1}, N2={g.N2}, norm={self.norm():.6e})"

    def save(self, path, fmt: str | None = None) -> Path:
        """Write values plus a JSON header.

        ``fmt`` is ``"csv"`` (one value per line) or ``"bin"`` (little-endian
        float64); by default it follows the file suffix.  The header goes to
        ``<path>.json``.
        """
        path = Path(path)
        fmt = fmt or ("bin" if path.suffix in (".bin", ".raw", ".f64") else "csv")
        header = dict(self.grid.to_dict(), layout=LAYOUT, K=self.grid.K, format=fmt)
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                for v in self.values:
                    fh.write(f"{v:.17e}\n")
        elif fmt == "bin":
            self.values.astype("<f8").tofile(path)
        else:
            raise ConfigError(f"unknown grid function format {fmt!r}")
        Path(str(path) + ".json").write_text(json.dumps(header, indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "GridFunction":
        path = Path(path)
        header = json.loads(Path(str(path) + ".json").read_text())
        grid = GridSpec(header["N1"], header["N2"], header["l1"], header["l2"])
        if header["format"] == "bin":
            values = np.fromfile(path, dtype="<f8")
        else:
            values = np.loadtxt(path, dtype=float, ndmin=1)
        return cls(grid, values)


@dataclass(frozen=True)
class EllipticCoeffs:
    """Coefficients of ``-div(a grad v) + c v``.

    Each of ``a`` and ``c`` is either a number or a vectorised callable
    ``f(x1, x2)``.  Optional ``a_min``/``c_min`` override the bounds that are
    otherwise taken from the values the stencil actually samples.
    """

    a: Field = 1.0
    c: Field = 0.0
    a_min: float | None = None
    c_min: float | None = None

    @property
    def is_constant(self) -> bool:
        return isinstance(self.a, numbers.Real) and isinstance(self.c, numbers.Real)

    @staticmethod
    def _eval(f: Field, x1, x2) -> np.ndarray:
        if isinstance(f, numbers.Real):
            return np.full(np.broadcast(x1, x2).shape, float(f))
        return np.broadcast_to(np.asarray(f(x1, x2), dtype=float), np.broadcast(x1, x2).shape)


class EllipticOperator:
    """Matrix-free five-point operator with homogeneous Dirichlet conditions.

    ``scale`` multiplies the whole operator; `normalize` uses it to build
    ``A / delta`` without re-sampling the coefficients.
    """

    def __init__(self, grid: GridSpec, coeffs: EllipticCoeffs | None = None, scale: float = 1.0):
        self.grid = grid
        self.coeffs = coeffs or EllipticCoeffs()
        self.scale = float(scale)
        N1, N2, h1, h2 = grid.N1, grid.N2, grid.h1, grid.h2
        # a at (x1 +- h1/2, x2): faces i1 + 1/2 for i1 = 0..N1-1, interior rows
        fx1 = (np.arange(N1) + 0.5) * h1
        fx2 = np.arange(1, N2) * h2
        X1, X2 = np.meshgrid(fx1, fx2, indexing="xy")
        self._ax = np.array(EllipticCoeffs._eval(self.coeffs.a, X1, X2)) / h1**2
        # a at (x1, x2 +- h2/2)
        gx1 = np.arange(1, N1) * h1
        gx2 = (np.arange(N2) + 0.5) * h2
        X1, X2 = np.meshgrid(gx1, gx2, indexing="xy")
        self._ay = np.array(EllipticCoeffs._eval(self.coeffs.a, X1, X2)) / h2**2
        X1, X2 = grid.coordinates()
        self._c = np.array(EllipticCoeffs._eval(self.coeffs.c, X1, X2))
        if np.any(self._ax <= 0) or np.any(self._ay <= 0):
            raise DomainError("coefficient a must be strictly positive")
        if np.any(self._c < 0):
            raise DomainError("coefficient c must be non-negative")
        for arr in (self._ax, self._ay, self._c):
            arr.flags.writeable = False

    @property
    def is_constant(self) -> bool:
        return self.coeffs.is_constant

    def scaled(self, factor: float) -> "EllipticOperator":
        """The operator ``factor * A``, sharing the sampled coefficients."""
        new = object.__new__(EllipticOperator)
        new.__dict__.update(self.__dict__)
        new.scale = self.scale * float(factor)
        return new

    def apply_array(self, u: np.ndarray) -> np.ndarray:
        """Apply to a flat value array; returns a new flat array."""
        U = np.asarray(u, dtype=float).reshape(self.grid.shape)
        P = np.pad(U, 1)
        ax, ay = self._ax, self._ay
        out = (
            ax[:, 1:] * (U - P[1:-1, 2:])
            + ax[:, :-1] * (U - P[1:-1, :-2])
            + ay[1:, :] * (U - P[2:, 1:-1])
            + ay[:-1, :] * (U - P[:-2, 1:-1])
            + self._c * U
        )
        if self.scale != 1.0:
            out *= self.scale
        return out.reshape(-1)

    def apply(self, u: GridFunction) -> GridFunction:
        if u.grid != self.grid:
            raise ConfigError("grid function and operator live on different grids")
        return GridFunction(self.grid, self.apply_array(u.values))

    __call__ = apply

    def assemble(self) -> sp.csr_matrix:
        """Explicit sparse matrix of the operator (for small-grid checks)."""
        n1, n2 = self.grid.N1 - 1, self.grid.N2 - 1
        idx = np.arange(self.grid.K).reshape(n2, n1)
        ax, ay = self._ax, self._ay
        diag = ax[:, 1:] + ax[:, :-1] + ay[1:, :] + ay[:-1, :] + self._c
        rows, cols, vals = [idx.ravel()], [idx.ravel()], [diag.ravel()]
        # east/west neighbours
        rows += [idx[:, :-1].ravel(), idx[:, 1:].ravel()]
        cols += [idx[:, 1:].ravel(), idx[:, :-1].ravel()]
        vals += [-ax[:, 1:-1].ravel(), -ax[:, 1:-1].ravel()]
        # north/south neighbours
        rows += [idx[:-1, :].ravel(), idx[1:, :].ravel()]
        cols += [idx[1:, :].ravel(), idx[:-1, :].ravel()]
        vals += [-ay[1:-1, :].ravel(), -ay[1:-1, :].ravel()]
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.grid.K, self.grid.K),
        )
        return (self.scale * mat).tocsr()

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues on the grid layout (constant coefficients only).

        Entry ``[k2 - 1, k1 - 1]`` belongs to the eigenvector
        ``sin(pi k1 x1 / l1) sin(pi k2 x2 / l2)``.
        """
        if not self.is_constant:
            raise ConfigError("closed-form eigenvalues need constant coefficients")
        lam1, lam2 = laplacian_eigenvalues_1d(self.grid)
        a, c = float(self.coeffs.a), float(self.coeffs.c)
        return self.scale * (a * (lam2[:, None] + lam1[None, :]) + c)

    def eigenvector(self, k1: int, k2: int) -> GridFunction:
        """Unit-norm eigenvector for mode ``(k1, k2)`` (constant coefficients)."""
        g = self.grid
        X1, X2 = g.coordinates()
        psi = np.sin(math.pi * k1 * X1 / g.l1) * np.sin(math.pi * k2 * X2 / g.l2)
        f = GridFunction(g, psi)
        return f / f.norm()

    def __repr__(self):
        g = self.grid
        return f"EllipticOperator(N1={g.N1}, N2={g.N2}, constant={self.is_constant}, scale={self.scale:g})"


def laplacian_eigenvalues_1d(grid: GridSpec):
    """Eigenvalues ``(4 / h**2) sin(pi k h / (2 l))**2`` along each axis."""
    k1 = np.arange(1, grid.N1)
    k2 = np.arange(1, grid.N2)
    lam1 = 4.0 / grid.h1**2 * np.sin(math.pi * k1 * grid.h1 / (2.0 * grid.l1)) ** 2
    lam2 = 4.0 / grid.h2**2 * np.sin(math.pi * k2 * grid.h2 / (2.0 * grid.l2)) ** 2
    return lam1, lam2


def min_eigenvalue_bound(op: EllipticOperator) -> tuple[float, bool]:
    """Smallest eigenvalue of ``op`` and whether it is exact.

    For constant coefficients the closed form is exact.  Otherwise the
    returned value is the lower bound ``a_min * mu_1(Laplacian) + c_min``.
    """
    lam1, lam2 = laplacian_eigenvalues_1d(op.grid)
    mu_lap = float(lam1[0] + lam2[0])
    if op.is_constant:
        return op.scale * (float(op.coeffs.a) * mu_lap + float(op.coeffs.c)), True
    g = op.grid
    a_min = op.coeffs.a_min
    if a_min is None:
        a_min = min(op._ax.min() * g.h1**2, op._ay.min() * g.h2**2)
    c_min = op.coeffs.c_min
    if c_min is None:
        c_min = float(op._c.min())
    return op.scale * (a_min * mu_lap + c_min), False


def min_eigenvalue(op: EllipticOperator) -> float:
    return min_eigenvalue_bound(op)[0]


def normalize(op: EllipticOperator) -> tuple[EllipticOperator, float]:
    """Return ``(A / delta, delta)`` with ``delta`` from `min_eigenvalue`.

    The right-hand side has to be rescaled by ``delta**(-alpha)``.
    """
    delta = min_eigenvalue(op)
    if not delta > 0:
        raise DomainError(f"operator is not positive definite (delta={delta})")
    return op.scaled(1.0 / delta), delta
