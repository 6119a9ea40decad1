"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class GpqedError(Exception):
    """Base class for all package errors."""


class InputError(GpqedError, ValueError):
    """Invalid argument to a library call (shape/dimension mismatch etc.)."""


class ConfigError(GpqedError):
    """Invalid or inconsistent analysis configuration."""


class DataError(GpqedError):
    """Malformed or unusable input data."""


class NumericalError(GpqedError):
    """A numerical routine failed beyond recovery (e.g. Cholesky breakdown)."""


class OptimizationError(NumericalError):
    """All optimizer restarts diverged."""
