"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """A parameter or array violates a documented precondition."""


class OutOfRangeError(InvalidInputError):
    """A value falls outside the bracket where an inverse map is defined."""


class NumericalFailureError(ArithmeticError):
    """An iterative numerical routine failed to reach its tolerance.

    The best available estimate is kept on ``best_estimate`` together with
    the achieved error estimate on ``error``.
    """

    def __init__(self, message, best_estimate=None, error=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error = error
