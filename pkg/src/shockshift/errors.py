"""Exception hierarchy shared by every module of the package."""


class ShockShiftError(Exception):
    """Base class for all errors raised by shockshift."""


class InvalidStateError(ShockShiftError, ValueError):
    """A state vector is non-finite or outside the extended domain."""


class VacuumGradientError(ShockShiftError, ValueError):
    """An entropy gradient was requested at a vacuum state."""


class UndefinedEigenvalueError(ShockShiftError, ValueError):
    """Eigenvalues are undefined (typically at vacuum)."""


class ConfigError(ShockShiftError, ValueError):
    """Bad arguments or configuration."""


class OutOfRangeError(ShockShiftError, IndexError):
    """A position or parameter falls outside the admissible range."""


class ContinuationError(ShockShiftError, RuntimeError):
    """Newton continuation of a shock curve failed."""

    def __init__(self, message, last_good_s=None):
        super().__init__(message)
        self.last_good_s = last_good_s


class AccuracyError(ShockShiftError, RuntimeError):
    """A quadrature or iteration did not reach the requested accuracy."""


class NotAOneShockError(ShockShiftError, ValueError):
    """The shock speed is not below the smallest eigenvalue of the left state."""


class HypothesisViolation(ShockShiftError, RuntimeError):
    """A structural hypothesis failed on the sampled data."""


class ConfigIntegrityError(ShockShiftError, RuntimeError):
    """A contraction configuration is internally inconsistent."""


class IntegrationError(ShockShiftError, RuntimeError):
    """An ODE integration step failed."""


class ParameterError(ShockShiftError, ValueError):
    """A model parameter is outside its admissible range."""
