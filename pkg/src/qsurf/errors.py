"""Exception and warning types shared across the package."""


class QsurfError(Exception):
    """Base class for all package errors."""


class DomainError(QsurfError):
    """A surface point lies outside the chart's domain box."""


class SingularChartError(QsurfError):
    """The parametrization is degenerate (metric not positive definite)."""


class StepSizeError(QsurfError):
    """A finite-difference step underflowed or is otherwise unusable."""


class ProfileError(QsurfError):
    """A confinement profile violates its validity constraints."""


class ResolutionError(QsurfError):
    """A grid or sample count is too coarse for the requested physics."""


class NumericalError(QsurfError):
    """A linear solve or eigensolve failed."""


class ClosedChannelError(QsurfError):
    """An operation was requested for a channel that is not open."""


class UndefinedPolarizationError(QsurfError):
    """Polarization is undefined because the total conductance vanishes."""


class ConfigError(QsurfError):
    """A run configuration failed validation."""


class ThresholdProximityWarning(UserWarning):
    """The requested energy is within tolerance of a channel threshold."""
