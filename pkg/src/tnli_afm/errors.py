"""Exception hierarchy and the CLI exit-code contract."""

from __future__ import annotations

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


class TnliError(Exception):
    """Base class for all errors raised by tnli-afm."""

    exit_code: int = 1


class InvalidArgumentError(TnliError, ValueError):
    """An argument falls outside the domain of an operation."""

    exit_code = EXIT_VALIDATION


class ConfigError(TnliError):
    """An experiment file or override violates the schema.

    Attributes:
        field_path: Dotted path of the first offending field, e.g. ``optics.eta``.
    """

    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, field_path: str | None = None) -> None:
        super().__init__(message)
        self.field_path = field_path


class ConfigIOError(TnliError, OSError):
    """A config file could not be read or an output location could not be written."""

    exit_code = EXIT_IO


class NumericalError(TnliError, ArithmeticError):
    """A computation reached a degenerate or non-physical result."""

    exit_code = EXIT_NUMERICAL
