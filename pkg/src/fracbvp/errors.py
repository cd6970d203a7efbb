"""Exception and warning types shared by every module."""

from __future__ import annotations


class FracBVPError(Exception):
    """Base class for all package errors."""


class ValidationError(FracBVPError, ValueError):
    """An input violates a documented precondition."""


class DomainError(FracBVPError, ValueError):
    """A function was evaluated outside its mathematical domain."""


class ResourceError(FracBVPError, RuntimeError):
    """A size or enumeration budget guard was exceeded."""


class NumericFailure(FracBVPError, RuntimeError):
    """A numerical procedure did not produce a trustworthy answer."""


class QuadratureError(NumericFailure):
    def __init__(self, message: str, estimates: list[float] | None = None):
        super().__init__(message)
        self.estimates = list(estimates or [])


class MaxIterExceeded(NumericFailure):
    def __init__(self, message: str, history: list[float], last=None):
        super().__init__(message)
        self.history = history
        self.last = last


class Diverged(NumericFailure):
    def __init__(self, message: str, history: list[float], last=None):
        super().__init__(message)
        self.history = history
        self.last = last


class ExprSyntaxError(ValidationError):
    """Parse failure; ``offset`` is a byte offset into the source text."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class ExprDomainError(DomainError):
    """Evaluation left the real domain; ``tag`` names the failing operation."""

    def __init__(self, tag: str, message: str):
        self.tag = tag
        self.detail = message
        super().__init__(f"{tag}: {message}")


class RangeWarning(UserWarning):
    """A computed constant falls outside the range the theory asserts."""


class ConsistencyWarning(UserWarning):
    """Two applicable regime verdicts contradict each other."""
