class SampError(Exception):
    """Base class for toolkit errors."""


class InputError(SampError, ValueError):
    """Malformed or mismatched input (shapes, ranges, files)."""


class NumericError(SampError, ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class TrainingError(SampError):
    """Training diverged."""


class EmptySelectionError(SampError):
    """No unfinished coordinates left to select."""


class NonTerminationError(SampError):
    """Path search exceeded its iteration bound."""
