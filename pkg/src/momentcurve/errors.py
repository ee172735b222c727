"""Shared exception types."""

from __future__ import annotations


class SpecValidationError(ValueError):
    """An input violates a documented precondition."""


class BudgetError(RuntimeError):
    """A requested computation exceeds a configured budget.

    Carries the offending count so callers (and the CLI) can report how far
    over budget the request was.
    """

    def __init__(self, kind: str, count: float, limit: float) -> None:
        self.kind = kind
        self.count = count
        self.limit = limit
        super().__init__(f"{kind} budget exceeded: need {count:.6g}, limit {limit:.6g}")
