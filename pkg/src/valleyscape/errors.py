"""Exception hierarchy shared by every valleyscape module."""


class ValleyscapeError(Exception):
    """Base class for all errors raised by valleyscape."""


class ConfigError(ValleyscapeError, ValueError):
    """Invalid parameter, size, or configuration value."""


class InputError(ValleyscapeError, ValueError):
    """Malformed numeric input (non-finite values, asymmetric matrix, ...)."""


class DimensionError(InputError):
    """A point or matrix does not match the landscape dimension."""


class AmbiguousValleyError(ValleyscapeError):
    """No unique valley axis exists (tied smallest coefficients)."""


class InvalidHomeomorphismError(ValleyscapeError):
    """Forward and inverse maps failed the round-trip check."""


class IndeterminateError(ValleyscapeError):
    """Both area ratios of a comparison are undefined."""
