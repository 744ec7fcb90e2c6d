"""Exception types raised by the package."""


class AdvGaussError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AdvGaussError, ValueError):
    """Malformed, non-finite or dimensionally inconsistent input."""


class NotPositiveDefiniteError(AdvGaussError, ValueError):
    """A covariance matrix failed the Cholesky pivot check."""


class SingularCovarianceError(NotPositiveDefiniteError):
    """The sample covariance is singular and no ridge was requested."""


class NoClosedFormProjectionError(AdvGaussError, NotImplementedError):
    """Euclidean projection is only available for p in {1, 2, inf}."""


class ConvergenceError(AdvGaussError, RuntimeError):
    """The convex solver hit its iteration cap before certifying optimality."""


class ParseError(AdvGaussError, ValueError):
    """A text input (matrix, vector, dataset, ball spec, config) could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line
