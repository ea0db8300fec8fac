"""Finite-interval integral representations of x**(-alpha) and their quadrature.

Every representation here maps the half-line integral for ``x**(-alpha)``
onto ``[0, 1]`` with an integrand that stays bounded at both ends, so that
the plain composite midpoint and Simpson rules apply.  Integrands are
vectorised over ``t`` and ``x`` with NumPy broadcasting.

The two representations used for the experiments are

* ``eq22`` -- substitution ``theta = t (1 - t)**sigma`` in the
  ``(x + theta**(1/(1-alpha)))**-1`` form, with
  ``sigma = kappa * (1 - alpha) / alpha``;
* ``eq23`` -- the two-term form obtained with ``theta = t**sigma``, with
  ``sigma = kappa * max(1/alpha, 1/(1 - alpha))``.

``kappa >= 1`` controls how many derivatives of the integrand stay bounded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

# Relative slack when comparing sigma against its threshold and when
# deciding whether an endpoint exponent is exactly zero.
_EXP_TOL = 1e-12


class Tag(str, enum.Enum):
    """Which integral representation an integrand evaluates."""

    EQ16 = "eq16"  # generic sigma, (x + ...)**-1 form
    EQ17 = "eq17"  # EQ16 at sigma = sigma_1
    EQ18 = "eq18"  # generic sigma, (1 + ... x)**-1 form
    EQ19 = "eq19"  # EQ18 at sigma = sigma_2
    EQ21 = "eq21"  # generic sigma, two-term form
    EQ22 = "eq22"  # EQ16 with sigma = kappa * sigma_1
    EQ23 = "eq23"  # EQ21 with sigma = kappa * sigma_3


class Rule(str, enum.Enum):
    MIDPOINT = "midpoint"
    SIMPSON = "simpson"

    @classmethod
    def parse(cls, name: "str | Rule") -> "Rule":
        if isinstance(name, Rule):
            return name
        aliases = {"rect": "midpoint", "rectangle": "midpoint", "mid": "midpoint"}
        key = aliases.get(str(name).lower(), str(name).lower())
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown quadrature rule {name!r}") from None


def check_alpha(alpha: float) -> float:
    """Return ``alpha`` as a float, raising `DomainError` unless 0 < alpha < 1."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must satisfy 0 < alpha < 1, got {alpha}")
    return alpha


def sigma_1(alpha: float) -> float:
    """Smallest sigma for which the eq16 integrand is bounded."""
    return (1.0 - alpha) / alpha


def sigma_2(alpha: float) -> float:
    """Smallest sigma for which the eq18 integrand is bounded."""
    return alpha / (1.0 - alpha)


def sigma_3(alpha: float) -> float:
    """Smallest sigma for which the eq21 integrand is bounded."""
    return max(1.0 / alpha, 1.0 / (1.0 - alpha))


_THRESHOLDS = {
    Tag.EQ16: sigma_1,
    Tag.EQ17: sigma_1,
    Tag.EQ22: sigma_1,
    Tag.EQ18: sigma_2,
    Tag.EQ19: sigma_2,
    Tag.EQ21: sigma_3,
    Tag.EQ23: sigma_3,
}


@dataclass(frozen=True)
class Representation:
    """An integral representation of ``x**(-alpha)`` on ``[0, 1]``.

    For the ``eq22``/``eq23`` tags give ``kappa`` and ``sigma`` is derived;
    for the generic ``eq16``/``eq18``/``eq21`` tags give ``sigma``;
    ``eq17``/``eq19`` fix sigma at its threshold.
    """

    tag: Tag
    alpha: float
    sigma: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        tag = Tag(self.tag)
        alpha = check_alpha(self.alpha)
        threshold = _THRESHOLDS[tag](alpha)
        sigma, kappa = self.sigma, self.kappa
        if tag in (Tag.EQ22, Tag.EQ23):
            if kappa is None:
                raise ConfigError(f"{tag.value} needs kappa")
            kappa = float(kappa)
            if not kappa >= 1.0:
                raise DomainError(f"kappa must be >= 1, got {kappa}")
            sigma = kappa * threshold
        elif tag in (Tag.EQ17, Tag.EQ19):
            sigma = threshold
        else:
            if sigma is None:
                raise ConfigError(f"{tag.value} needs sigma")
            sigma = float(sigma)
            if sigma < threshold * (1.0 - _EXP_TOL):
                raise DomainError(
                    f"sigma={sigma} is below the threshold {threshold} for {tag.value}"
                )
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def eq22(cls, alpha: float, kappa: float) -> "Representation":
        return cls(Tag.EQ22, alpha, kappa=kappa)

    @classmethod
    def eq23(cls, alpha: float, kappa: float) -> "Representation":
        return cls(Tag.EQ23, alpha, kappa=kappa)

    def integrand(self, t, x):
        return _DISPATCH[self.tag](t, x, self)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)) or np.any(np.isnan(t)):
        raise DomainError("integration variable t must lie in [0, 1]")
    return t


def _snap(exponent: float) -> float:
    return 0.0 if abs(exponent) < _EXP_TOL else exponent


def pow_one_minus(t, exponent: float):
    """``(1 - t)**exponent`` for t in [0, 1], exponent >= 0, with the t=1 limit."""
    exponent = _snap(exponent)
    t = np.asarray(t, dtype=float)
    if exponent == 0.0:
        return np.ones_like(t)
    with np.errstate(divide="ignore"):
        return np.exp(exponent * np.log1p(-t))


def pow_t(t, exponent: float):
    """``t**exponent`` for exponent >= 0, taking ``0**0 = 1``."""
    return np.power(np.asarray(t, dtype=float), _snap(exponent))


def _require(rep: Representation, *tags: Tag):
    if rep.tag not in tags:
        names = ", ".join(t.value for t in tags)
        raise ConfigError(f"representation {rep.tag.value} used where {names} expected")


# eq16 / eq22 -- density(t) / (gamma(t) x + beta(t))


def eq22_density(t, alpha: float, sigma: float):
    """Weight multiplying the resolvent in the eq16/eq22 integrand."""
    pref = math.sin(math.pi * alpha) / ((1.0 - alpha) * math.pi)
    stretch = pow_one_minus(t, sigma * alpha / (1.0 - alpha) - 1.0)
    return pref * stretch * (1.0 + (sigma - 1.0) * np.asarray(t, dtype=float))


def eq22_shifts(t, alpha: float, sigma: float):
    """``(gamma, beta)`` with the eq16/eq22 resolvent ``(gamma x + beta)**-1``."""
    gamma = pow_one_minus(t, sigma / (1.0 - alpha))
    beta = pow_t(t, 1.0 / (1.0 - alpha))
    return gamma, beta


def integrand_eq22(t, x, rep: Representation):
    """Integrand of the eq16 family (``eq16``, ``eq17`` or ``eq22`` tags)."""
    _require(rep, Tag.EQ22, Tag.EQ16, Tag.EQ17)
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    gamma, beta = eq22_shifts(t, rep.alpha, rep.sigma)
    return eq22_density(t, rep.alpha, rep.sigma) / (gamma * x + beta)


def integrand_eq17(t, x, alpha: float):
    t = _check_t(t)
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    pref = math.sin(math.pi * alpha) / (alpha * (1.0 - alpha) * math.pi)
    bracket = pow_one_minus(t, 1.0 / alpha) * x + pow_t(t, 1.0 / (1.0 - alpha))
    return pref * (alpha + (1.0 - 2.0 * alpha) * t) / bracket


# eq18 / eq19 -- the (1 + ... x)**-1 family


def integrand_eq18(t, x, rep: Representation):
    _require(rep, Tag.EQ18, Tag.EQ19)
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    alpha, sigma = rep.alpha, rep.sigma
    pref = math.sin(math.pi * alpha) / (alpha * math.pi)
    stretch = pow_one_minus(t, sigma * (1.0 - alpha) / alpha - 1.0)
    bracket = pow_one_minus(t, sigma / alpha) + pow_t(t, 1.0 / alpha) * x
    return pref * stretch * (1.0 + (sigma - 1.0) * t) / bracket


def integrand_eq19(t, x, alpha: float):
    t = _check_t(t)
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    pref = math.sin(math.pi * alpha) / (alpha * (1.0 - alpha) * math.pi)
    bracket = pow_one_minus(t, 1.0 / (1.0 - alpha)) + pow_t(t, 1.0 / alpha) * x
    return pref * (1.0 - alpha + (2.0 * alpha - 1.0) * t) / bracket


# eq21 / eq23 -- two-term form


def eq23_terms(t, alpha: float, sigma: float):
    """Node data for the two resolvents of the eq21/eq23 integrand.

    Returns ``[(density, gamma, beta), ...]`` for the terms
    ``t**(sigma alpha - 1) (1 + t**sigma x)**-1`` and
    ``t**(sigma (1 - alpha) - 1) (x + t**sigma)**-1``.
    """
    pref = sigma * math.sin(math.pi * alpha) / math.pi
    ts = pow_t(t, sigma)
    ones = np.ones_like(ts)
    return [
        (pref * pow_t(t, sigma * alpha - 1.0), ts, ones),
        (pref * pow_t(t, sigma * (1.0 - alpha) - 1.0), ones, ts),
    ]


def integrand_eq23(t, x, rep: Representation):
    """Integrand of the eq21 family (``eq21`` or ``eq23`` tags)."""
    _require(rep, Tag.EQ23, Tag.EQ21)
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    total = 0.0
    for density, gamma, beta in eq23_terms(t, rep.alpha, rep.sigma):
        total = total + density / (gamma * x + beta)
    return total


def _integrand_eq17_rep(t, x, rep):
    return integrand_eq17(t, x, rep.alpha)


def _integrand_eq19_rep(t, x, rep):
    return integrand_eq19(t, x, rep.alpha)


_DISPATCH = {
    Tag.EQ16: integrand_eq22,
    Tag.EQ22: integrand_eq22,
    Tag.EQ17: _integrand_eq17_rep,
    Tag.EQ18: integrand_eq18,
    Tag.EQ19: _integrand_eq19_rep,
    Tag.EQ21: integrand_eq23,
    Tag.EQ23: integrand_eq23,
}


# Quadrature


def quadrature_nodes(rule: "Rule | str", M: int):
    """Nodes and weights of a composite rule with ``M`` equal parts of [0, 1].

    Simpson needs an even ``M`` and uses the ``M + 1`` boundary nodes with
    weights ``1, 4, 2, ..., 4, 1`` times ``1 / (3 M)``.
    """
    rule = Rule.parse(rule)
    if int(M) != M or M < 1:
        raise ConfigError(f"M must be a positive integer, got {M}")
    M = int(M)
    if rule is Rule.MIDPOINT:
        t = (np.arange(M) + 0.5) / M
        w = np.full(M, 1.0 / M)
    else:
        if M % 2:
            raise ConfigError(f"Simpson's rule needs an even M, got {M}")
        t = np.arange(M + 1) / M
        w = np.ones(M + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w /= 3.0 * M
    return t, w


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule, number of parts and representation to integrate."""

    rule: Rule
    M: int
    representation: Representation

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule.parse(self.rule))
        # validates M (and its parity for Simpson)
        quadrature_nodes(self.rule, self.M)

    @classmethod
    def make(cls, alpha, M, kappa, rule="midpoint", repr="eq22"):
        tag = Tag(repr)
        if tag not in (Tag.EQ22, Tag.EQ23):
            raise ConfigError(f"use Representation directly for {tag.value}")
        return cls(Rule.parse(rule), int(M), Representation(tag, alpha, kappa=kappa))

    @property
    def alpha(self) -> float:
        return self.representation.alpha

    def nodes(self):
        return quadrature_nodes(self.rule, self.M)


def approx_frac_power(x, q: QuadratureSpec, chunk: int = 4096):
    """Quadrature approximation of ``x**(-alpha)``.

    ``x`` may be a scalar or an array.  Returns a float for scalar input.
    Nodes are summed in ascending order, independently for every ``x``.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 1.0):
        raise DomainError("the representations are only used for x >= 1")
    t, w = q.nodes()
    flat = xs.reshape(-1)
    out = np.empty_like(flat)
    rep = q.representation
    for start in range(0, flat.size, chunk):
        xc = flat[start:start + chunk, None]
        terms = rep.integrand(t[None, :], xc) * w
        # cumsum adds strictly left to right: ascending node order
        out[start:start + chunk] = np.cumsum(terms, axis=1)[:, -1]
    if xs.ndim == 0:
        return float(out[0])
    return out.reshape(xs.shape)


@dataclass(frozen=True)
class ScanSpec:
    """Log-uniform sample of ``x`` in ``[x_min, x_max]``, endpoints included."""

    x_max: float = 1e20
    x_min: float = 1.0
    samples_per_decade: int = 100

    def __post_init__(self):
        if not self.x_min >= 1.0:
            raise ConfigError(f"x_min must be >= 1, got {self.x_min}")
        if not self.x_max > self.x_min:
            raise ConfigError(f"empty scan: x_max={self.x_max} <= x_min={self.x_min}")
        if int(self.samples_per_decade) != self.samples_per_decade or self.samples_per_decade < 1:
            raise ConfigError("samples_per_decade must be a positive integer")

    def points(self) -> np.ndarray:
        lo, hi = math.log10(self.x_min), math.log10(self.x_max)
        n = int(math.ceil(round((hi - lo) * self.samples_per_decade, 9))) + 1
        x = np.logspace(lo, hi, max(n, 2))
        x[0], x[-1] = self.x_min, self.x_max
        return x


@dataclass(frozen=True)
class ErrorReport:
    """Maximal absolute error of a scalar approximation over a scan."""

    max_error: float
    argmax_x: float
    x: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    quadrature: QuadratureSpec | None = None
    scan: ScanSpec | None = None


def error_scan(q: QuadratureSpec, scan: ScanSpec | None = None) -> ErrorReport:
    """Scan ``|r(x) - x**(-alpha)|`` over ``scan`` and report its maximum."""
    scan = scan or ScanSpec()
    x = scan.points()
    err = np.abs(approx_frac_power(x, q) - x ** (-q.alpha))
    k = int(np.argmax(err))
    return ErrorReport(float(err[k]), float(x[k]), x, err, q, scan)
