"""Exception hierarchy shared across the package.

CLI exit codes map onto these: ConfigError -> 2, DataError -> 3,
NumericError -> 4. Everything else is a plain crash (exit 1).
"""


class PlaygenError(Exception):
    """Base class for all package errors."""


class ConfigError(PlaygenError):
    """Invalid or inconsistent configuration."""


class DataError(PlaygenError):
    """Corrupt, missing, or malformed data files."""


class NumericError(PlaygenError):
    """Non-finite values where finite ones are required."""


class InputValidationError(PlaygenError):
    """Caller passed arguments violating an operation's preconditions."""


class DimensionError(InputValidationError):
    """Tensor shapes inconsistent with the configuration."""
