"""
errors.py
---------
Exception hierarchy shared by the deciders and the CLI.
"""
import time
from typing import Optional


class SeparationError(Exception):
    """Base class for every failure the tool reports to the user."""


class ResourceLimitError(SeparationError):
    """A configured cap (monoid size, determinization states, labels) was exceeded."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded the cap of {cap}")
        self.what = what
        self.cap = cap


class BudgetExceeded(ResourceLimitError):
    def __init__(self, seconds: Optional[float] = None):
        SeparationError.__init__(self, "wall-time budget exhausted")
        self.what = "wall time"
        self.cap = seconds


class AlphabetMismatchError(SeparationError):
    pass


class RegexSyntaxError(SeparationError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownLetterError(SeparationError):
    def __init__(self, letter: str):
        super().__init__(f"unknown letter {letter!r}")
        self.letter = letter


class InvalidMonoidError(SeparationError):
    pass


class IncompatibleTaggingError(SeparationError):
    pass


class QdimacsFormatError(SeparationError):
    def __init__(self, message: str, line: Optional[int] = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line


class InputFormatError(SeparationError):
    pass


class CertificateError(SeparationError):
    pass


def deadline_after(seconds: Optional[float]) -> Optional[float]:
    if not seconds:
        return None
    return time.monotonic() + seconds


def check_deadline(deadline: Optional[float]):
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded()
