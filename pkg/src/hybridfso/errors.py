"""Exception hierarchy shared by every module of the package."""


class HybridFsoError(Exception):
    """Base class for all package errors."""


class DomainError(HybridFsoError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """A closed formula diverges at the requested point (e.g. zero Rytov variance)."""


class NumericalNonConvergenceError(HybridFsoError, ArithmeticError):
    """A numerical procedure failed to converge within its refinement budget."""


class AccuracyError(NumericalNonConvergenceError):
    """A result was computed but its error bound violates the accuracy contract.

    ``value`` and ``error`` carry the offending estimate so callers can report it.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ConfigError(HybridFsoError, ValueError):
    """Invalid scenario or sweep configuration."""
