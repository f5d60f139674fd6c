"""Exception types shared across the package.

The CLI maps each family onto a distinct exit code.
"""


class MomentChainError(Exception):
    """Base class for all package errors."""


class ConfigError(MomentChainError, ValueError):
    """Invalid parameters, grids or configuration files."""


class NumericError(MomentChainError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class MomentOverflowError(NumericError):
    """Moment magnitudes exceeded the overflow guard during propagation."""


class CutoffError(ConfigError):
    """Fock-space cutoff too small for the requested state or moment order."""


class OracleMismatchError(MomentChainError):
    """Brute-force oracle and moment-matrix propagation disagree."""
