"""Exception types raised across the package."""


class HDLocationError(Exception):
    """Base class for all package errors."""


class ModelError(HDLocationError, ValueError):
    """Invalid covariance model (asymmetric, not positive definite, bad eta)."""


class UndefinedTestError(HDLocationError):
    """Hotelling's T^2 (and anything built on it) is undefined for this sample."""


class DegenerateDataError(HDLocationError, ArithmeticError):
    """The sample carries no spread, e.g. tr S == 0."""


class StandardizationError(HDLocationError, ArithmeticError):
    """A variance estimate used for standardization is not positive."""


class SpecValidationError(HDLocationError, ValueError):
    """An experiment specification failed validation.

    ``problems`` holds one message per violation, each prefixed with the
    offending key path.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
