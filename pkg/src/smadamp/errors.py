"""Exception hierarchy shared by the solver and the command-line front end."""

from __future__ import annotations


class SmaDampError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SmaDampError, ValueError):
    """Invalid parameters, malformed configuration files or unknown presets."""


class DomainError(SmaDampError, ValueError):
    """A physical quantity outside its admissible range (e.g. theta <= 0)."""


class NonFiniteState(SmaDampError, ArithmeticError):
    """NaN or inf produced while assembling residuals or updating the state."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NonConvergence(SmaDampError, RuntimeError):
    """Newton iteration did not reach the requested tolerance."""

    def __init__(self, message: str, iterations: int, residual_norm: float,
                 time: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual_norm = residual_norm
        self.time = time


class SingularJacobian(NonConvergence):
    """LU factorisation of the Newton matrix found a negligible pivot."""
