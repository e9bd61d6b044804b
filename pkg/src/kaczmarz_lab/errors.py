"""Exception types shared across the package."""


class KaczmarzLabError(Exception):
    """Base class for package-specific errors."""


class ConfigError(KaczmarzLabError):
    """Raised when an experiment configuration is invalid."""


class NumericalError(KaczmarzLabError):
    """Raised when a computation cannot proceed for numerical reasons.

    Examples: a rank-zero matrix handed to the SVD, a singular triangular
    factor, or a non-convergent mode in a fixed-point solve.
    """
