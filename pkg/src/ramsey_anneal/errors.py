"""Exception types shared across the package."""

from __future__ import annotations


class RamseyError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(RamseyError):
    """A problem, colouring, or config is internally inconsistent."""


class ParseError(RamseyError):
    """A colouring or certificate file could not be parsed."""


class VerificationError(RamseyError):
    """A colouring failed clique-freeness verification.

    Carries the offending clique so callers can report it.
    """

    def __init__(self, message: str, vertices: tuple[int, ...] = (), colour: int = -1):
        super().__init__(message)
        self.vertices = vertices
        self.colour = colour


class BudgetExceededError(RamseyError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, message: str, required: int, budget: int):
        super().__init__(message)
        self.required = required
        self.budget = budget
