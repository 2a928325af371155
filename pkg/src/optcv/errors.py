"""Exception types shared across the package."""


class OptcvError(Exception):
    """Base class for all package errors."""


class DimensionError(OptcvError):
    """Shapes or lengths of inputs do not line up."""


class DegenerateInput(OptcvError):
    """Input is structurally unusable (rank deficiency, empty partition, ...)."""


class SingularDesign(OptcvError):
    """Design matrix is numerically singular (reciprocal condition < 1e-12)."""


class NotPositiveDefinite(OptcvError):
    """A matrix required to be positive definite fails a Cholesky factorization."""


class InvalidSpec(OptcvError):
    """A covariance or experiment specification violates its validity bounds.

    ``covariance.validate`` returns instances of this class instead of raising,
    so callers can inspect the reason without try/except.
    """


class ConfigError(OptcvError):
    """Experiment configuration is invalid; maps to CLI exit code 2."""
