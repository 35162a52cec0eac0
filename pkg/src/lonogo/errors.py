"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LonogoError(Exception):
    """Base class for all package errors."""


class ContractError(LonogoError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class ParseError(LonogoError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ValidationError(LonogoError, ValueError):
    """Carries every violated invariant, not just the first."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ResourceLimitError(LonogoError):
    """Raised when a computation would exceed the configured memory budget."""

    def __init__(self, message: str, stats: dict | None = None):
        self.stats = dict(stats or {})
        super().__init__(message)


class InternalConsistencyError(LonogoError):
    """A solver reported success but the symbolic check disagreed."""
