"""Exception types shared across the package."""


class SemicovError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidParameterError(SemicovError):
    """A kernel or operation parameter is outside its admissible range."""


class NotPositiveDefiniteError(SemicovError):
    """A covariance matrix failed positive-definiteness.

    Carries the pivot (leading minor order) at which the Cholesky
    factorization broke down, when known.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SingularMatrixError(SemicovError):
    """A linear solve hit an exactly singular matrix (collapsed design)."""


class InfeasibleDesignError(SemicovError):
    """No candidate design satisfies the search constraints."""


class DegenerateSeriesError(SemicovError):
    """An input series is constant or too short for the estimator."""


class DimensionMismatchError(SemicovError):
    """Array sizes are inconsistent with the requested operation."""


class MismatchedConfigurationError(SemicovError):
    """Two results being combined were produced under different settings."""
