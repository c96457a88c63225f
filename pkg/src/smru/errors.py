"""Exception hierarchy shared by every module."""


class SmruError(Exception):
    """Base class for all package errors."""


class ShapeError(SmruError, ValueError):
    pass


class ConfigError(SmruError, ValueError):
    pass


class FormatError(SmruError, ValueError):
    """Malformed or non-conforming file (WAV, weights, checkpoint)."""


class NumericError(SmruError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class ContractError(SmruError, ValueError):
    """Caller violated a runtime contract (e.g. wrong chunk size)."""
