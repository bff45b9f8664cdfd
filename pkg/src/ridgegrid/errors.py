"""Exception types raised by ridgegrid."""


class RidgeGridError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RidgeGridError, ValueError):
    """Invalid grid, optimizer or experiment configuration."""


class UsageError(RidgeGridError, ValueError):
    """Objects combined inconsistently (grid mismatch, wrong lengths)."""


class EvaluationError(RidgeGridError, ArithmeticError):
    """A field or profile produced non-finite values."""


class NumericError(RidgeGridError, ArithmeticError):
    """Non-finite entries in a linear system."""


class DomainError(RidgeGridError, ValueError):
    """Particle coordinates outside the open cube (-1, 1)^D."""


class TrainingError(RidgeGridError, RuntimeError):
    """An offline training sample failed to reach its tolerance."""
