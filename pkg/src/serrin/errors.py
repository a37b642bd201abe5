"""Exception hierarchy shared by all serrin modules."""


class SerrinError(Exception):
    """Base class for all errors raised by this package."""


class DomainValidationError(SerrinError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigError(SerrinError, ValueError):
    """A run configuration value is malformed or out of range."""


class PrecisionError(SerrinError):
    """A requested accuracy could not be certified (series tail, integrator)."""


class NumericalError(SerrinError):
    """A linear solve or iteration failed to produce a usable result."""


class AnalysisError(SerrinError):
    """A verified mathematical property failed its numerical check."""


class ConsistencyError(SerrinError):
    """Two independent routes to the same quantity disagree beyond tolerance."""
