"""Exception types raised by fracpow."""


class FracPowError(Exception):
    """Base class for all fracpow errors."""


class DomainError(FracPowError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigError(FracPowError, ValueError):
    """An inconsistent or unsupported configuration was requested."""


class ConvergenceFailure(FracPowError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, iterations=None, residual=None, node=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.node = node
