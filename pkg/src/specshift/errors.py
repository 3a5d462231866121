"""Exception types raised by the numerical guards in this package."""


class SpecshiftError(Exception):
    """Base class for all package-specific errors."""


class NotHermitianError(SpecshiftError):
    """Input matrix is not Hermitian within tolerance."""


class OnEigenvalueError(SpecshiftError):
    """Counting level coincides with an eigenvalue; the count is ambiguous."""


class AmbiguousAtBreakpointError(SpecshiftError):
    """Step function evaluated at one of its breakpoints."""


class NotInvertibleAtInfinityError(SpecshiftError):
    """Zero lies in (or too close to) the spectrum of an endpoint matrix."""


class TruncateFirstError(SpecshiftError):
    """Operation requires a path with exactly compact derivative support."""


class DynamicRangeExceededError(SpecshiftError):
    """Exponential dynamic range of the mode propagation is too large."""


class UnexpectedBoundStateError(SpecshiftError):
    """A transmission coefficient is numerically singular."""


class NoSpectralGapAtThresholdError(SpecshiftError):
    """No clear spectral gap around the kernel-counting threshold."""


class UnstableLevelError(SpecshiftError):
    """Counting level too close to a discrete eigenvalue."""


class UnresolvedCrossingError(SpecshiftError):
    """A crossing bracket could not be isolated at the requested tolerance."""


class IllConditionedIntersectionError(SpecshiftError):
    """A principal angle is too close to the decision threshold."""


class ConfigError(SpecshiftError):
    """Scenario configuration violates the schema or its constraints."""
