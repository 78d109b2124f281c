"""Exception types raised across the package."""


class PreconditionError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class SingularMatrixError(ArithmeticError):
    """The Fisher-information linear system cannot be regularized."""


class ConvergenceError(ArithmeticError):
    """Extrapolation toward the pure-state limit did not settle."""


class DistributionError(ValueError):
    """A probability table is negative or not normalized."""


class NotEstimableError(ValueError):
    """A data set carries no information about the absorption."""
