"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class StiefelFSError(Exception):
    exit_code = 1


class DataIOError(StiefelFSError, OSError):
    """File could not be read or parsed as a table."""

    exit_code = 2


class DataError(StiefelFSError, ValueError):
    """Input data violates a validation rule."""

    exit_code = 3


class DimensionError(DataError):
    exit_code = 3


class NumericalError(StiefelFSError, ArithmeticError):
    exit_code = 4


class ConfigError(StiefelFSError, ValueError):
    exit_code = 5
