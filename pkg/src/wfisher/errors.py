"""Exception types raised by wfisher."""


class WFisherError(Exception):
    """Base class for all package-specific errors."""


class InvalidEvidenceError(WFisherError, ValueError):
    """A p-value or weight violates its domain constraints."""


class ZeroPValueError(InvalidEvidenceError):
    """A p-value of exactly zero was supplied.

    Zero is rejected rather than clamped: a caller that really wants the
    degenerate "combined p-value is zero" semantics has to decide that
    explicitly instead of having a data error silently absorbed.
    """


class MethodError(WFisherError, ValueError):
    """A forced combination method does not apply to the given weights."""


class ConditioningError(WFisherError, ArithmeticError):
    """A signed exponential sum lost too many digits to cancellation.

    ``condition`` is sum(|term|) / |result| for the offending sum; values
    above ~1e12 mean the floating-point result is mostly noise.
    """

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class ClusterSpanError(WFisherError, ValueError):
    """A weight cluster is too wide for one representative weight."""


class GridError(WFisherError, ValueError):
    """The convolution grid cannot hold enough probability mass."""
