"""Exception types shared across the package."""


class PhidivError(Exception):
    """Base class for all package errors."""


class DomainError(PhidivError, ValueError):
    """An argument lies outside the interior of the relevant domain."""


class ParameterSpaceError(PhidivError, ValueError):
    """A parameter value lies outside the declared parameter box."""


class RankDeficiencyError(PhidivError, ValueError):
    """A matrix that must be nonsingular is (numerically) rank deficient."""


class EstimationError(PhidivError, RuntimeError):
    """Outer estimation failed; carries per-start diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class NotApplicableError(PhidivError, ValueError):
    """The requested procedure does not apply to this model configuration."""


class DataError(PhidivError, ValueError):
    """Malformed input data (CSV parse failures, empty samples, ...)."""
