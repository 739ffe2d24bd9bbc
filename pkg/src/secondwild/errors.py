"""Exception types shared across the package.

ValueError is used for plain argument/domain violations (bad lags, malformed
index sets, dimension mismatches).  The classes below mark failures of the
numerical machinery itself, which the CLI maps to a distinct exit code.
"""


class NumericalError(ArithmeticError):
    """A numerical procedure could not produce a usable result."""


class NotPsdError(NumericalError):
    """A matrix that must be positive semi-definite is indefinite.

    Carries the most negative eigenvalue found so callers can tell a
    rounding-level violation from a genuinely indefinite input.
    """

    def __init__(self, message: str, most_negative: float):
        super().__init__(message)
        self.most_negative = most_negative


class DegenerateVarianceError(NumericalError):
    """A variance that must be positive is zero (constant or empty signal)."""


class InputDataError(ValueError):
    """User-supplied data could not be parsed or fails basic validation."""
