"""Exception types shared across the package."""


class ReasimError(Exception):
    """Base class for package errors."""


class InvalidInputError(ReasimError):
    """Raised when an operation receives values outside its contract."""


class ConfigError(ReasimError):
    """Raised for bad run configuration (unknown keys, missing weights)."""


class GenerationError(ReasimError):
    """Raised when scenario generation cannot find a feasible sample."""


class WarmupError(ReasimError):
    """Raised when a frame history is consumed before it holds H frames."""
