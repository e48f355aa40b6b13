"""Exception hierarchy shared across the package."""


class MatchingBanditsError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class ValidationError(MatchingBanditsError, ValueError):
    """Malformed input: bad permutation, dimension mismatch, bad config field."""

    category = "validation"


class CapacityError(MatchingBanditsError):
    """Exhaustive enumeration requested for an instance that is too large."""

    category = "capacity"


class MarginAssumptionError(MatchingBanditsError):
    """The configured uniform minimum margin is not strictly positive."""

    category = "margin-assumption"


class HorizonTooShortError(MatchingBanditsError):
    """The planned exploration stage does not fit inside the horizon."""

    category = "horizon-too-short"


class OrderingViolationError(MatchingBanditsError):
    """A bound requiring positive standardized gaps received a nonpositive one."""

    category = "ordering-violation"


class DegenerateCovarianceError(MatchingBanditsError):
    """A variance term that must be positive evaluated to zero or below."""

    category = "degenerate-covariance"
