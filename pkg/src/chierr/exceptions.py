class ChiError(Exception):
    """Base class for errors raised by :mod:`chierr`."""


class ValidationError(ChiError, ValueError):
    """Input violates a physical or structural precondition."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class NumericalError(ChiError, ArithmeticError):
    """A computation could not be completed (non-convergence, rank deficiency)."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConvergenceError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass
