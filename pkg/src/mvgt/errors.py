"""Exception hierarchy shared across the package.

Each class carries the process exit code the command-line front end maps it to.
"""


class MVGTError(Exception):
    exit_code = 1


class ConfigError(MVGTError, ValueError):
    """Invalid configuration, flags, scheme or layout files."""

    exit_code = 2


class ParameterError(ConfigError):
    """An argument is outside its admissible range."""


class DimensionError(MVGTError, ValueError):
    """Tensor shapes are incompatible for the requested operation."""

    exit_code = 2


class ContractError(MVGTError, RuntimeError):
    """An API precondition was violated (e.g. backward from a non-scalar)."""

    exit_code = 2


class DataError(MVGTError, ValueError):
    """Input data is malformed, empty or inconsistent."""

    exit_code = 3


class FormatError(DataError):
    """A binary or JSON file does not follow its declared format."""


class NumericError(MVGTError, FloatingPointError):
    """NaN or Inf appeared where a finite value is required."""

    exit_code = 4
