"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class DomainError(ValueError):
    """The requested quantity does not exist for the given input."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed or lost too much precision."""


class ConvergenceError(NumericalError):
    """Quadrature did not reach the requested tolerance.

    The best achieved error estimate is kept on ``estimate``.
    """

    def __init__(self, message, estimate=float("nan")):
        super().__init__(message)
        self.estimate = estimate


class TruncationWarning(UserWarning):
    """Fock-space truncation is visibly affecting a result."""


class RegimeWarning(UserWarning):
    """An asymptotic expansion is used outside its small-parameter regime."""
