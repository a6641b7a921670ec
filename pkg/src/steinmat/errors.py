"""Typed exceptions shared across the package."""


class SteinmatError(Exception):
    """Base class for all package errors."""


class DimensionError(SteinmatError, ValueError):
    """Operands have incompatible or invalid shapes."""


class DomainError(SteinmatError, ValueError):
    """Input is outside the mathematical domain (non-SPD, bad dof, ...)."""


class CutLocusError(SteinmatError, RuntimeError):
    """Riemannian logarithm undefined or not reachable (cut locus)."""


class ConvergenceError(SteinmatError, RuntimeError):
    """An iterative routine failed to converge within its budget."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NonConvexError(SteinmatError, RuntimeError):
    """A U-statistic quadratic form is significantly indefinite.

    Carries the offending minimum eigenvalue and the stationary point of the
    symmetrized system so callers can still inspect it.
    """

    def __init__(self, min_eigenvalue, solution=None):
        super().__init__(
            f"quadratic form is not positive semi-definite "
            f"(min eigenvalue {min_eigenvalue:.3e})"
        )
        self.min_eigenvalue = min_eigenvalue
        self.solution = solution


class ConfigError(SteinmatError, ValueError):
    """Configuration document failed schema validation."""
