"""Exception hierarchy shared by every module."""


class ArcDDLError(Exception):
    """Base class for all errors raised by arcddl."""


class ConfigurationError(ArcDDLError, ValueError):
    """A configuration value or precondition is invalid."""


class ParseError(ArcDDLError, ValueError):
    """A CSV row or JSON document could not be parsed."""


class SamplingError(ArcDDLError, ValueError):
    """Time stamps are not uniformly spaced or sample intervals disagree."""


class EmptyInputError(ArcDDLError, ValueError):
    """Input contains no data."""


class RangeError(ArcDDLError, ValueError):
    """A requested time range selects no samples."""


class InsufficientDataError(ArcDDLError, ValueError):
    """Not enough samples or columns for the requested operation."""


class ShapeError(ArcDDLError, ValueError):
    """Array dimensions do not match."""


class NumericInputError(ArcDDLError, ValueError):
    """Input contains NaN or infinite values."""


class NumericError(ArcDDLError, ArithmeticError):
    """A numerical procedure failed (singular regression, eigen-solver failure)."""


class SingularFitError(NumericError):
    """Least-squares normal equations are singular and the ridge cannot rescue them."""


class ConfinementError(NumericError):
    """The eigenvector basis is defective or too ill-conditioned to confine."""
