"""
Exception hierarchy shared by every module.

The CLI maps any IpsError to exit code 2 and UsageError to exit code 1.
"""
from typing import Optional


class IpsError(Exception):
    pass


class ValidationError(IpsError):
    """A value object or parameter set violates its invariants."""


class CalibrationError(IpsError):
    pass


class GeometryError(IpsError):
    pass


class ScenarioError(IpsError):
    """Raised while running a scenario; carries the tick that failed."""

    def __init__(self, message: str, *, tick: Optional[int] = None, timestamp: Optional[float] = None):
        self.tick = tick
        self.timestamp = timestamp
        if tick is not None:
            message = f"tick {tick} (t={timestamp:.3f}s): {message}"
        super().__init__(message)


class FramingError(IpsError):
    pass


class CorruptFrameError(IpsError):
    pass


class TrainingError(IpsError):
    pass


class DataError(IpsError):
    """Bad input data; `row` is the zero-based index of the offending row."""

    def __init__(self, message: str, *, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class InvalidTransition(IpsError):
    pass


class UsageError(Exception):
    pass
