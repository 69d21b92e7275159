"""Exception hierarchy shared by the estimation, simulation and I/O layers."""


class TruncModeError(Exception):
    """Base class for every error raised by this package."""


class DegenerateRiskSetError(TruncModeError):
    """A product-limit factor had an empty risk set (n * C_n == 0)."""


class EmptyRiskSetsError(TruncModeError):
    """No evaluation point has a positive risk-set fraction."""


class ZeroWeightError(TruncModeError):
    """A truncation-distribution weight G(X_i) vanished."""


class AllTermsDroppedError(TruncModeError):
    """Every kernel term was removed by the G_n(X_i) != 0 indicator."""


class EmptySampleError(TruncModeError):
    """No pair survived the truncation filter."""


class DataFormatError(TruncModeError):
    """Malformed or invalid input data.

    ``rows`` holds the 1-based data row numbers at fault, when known.
    """

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


class ConvergenceError(TruncModeError):
    """Iterative solver hit its iteration cap; ``last`` is the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ExperimentError(TruncModeError):
    """A Monte-Carlo cell failed; carries the offending cell coordinates."""

    def __init__(self, n, rate, replica, cause):
        super().__init__(
            f"cell (n={n}, truncation_rate={rate}, replica={replica}) failed: {cause}"
        )
        self.n = n
        self.rate = rate
        self.replica = replica
        self.cause = cause
