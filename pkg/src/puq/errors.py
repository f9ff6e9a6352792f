"""Exception hierarchy shared by the parser, evaluator and CLI."""

from __future__ import annotations


class PuqError(Exception):
    pass


class InternalError(PuqError):
    """An invariant the parser should have guaranteed was violated."""


class ParseError(PuqError):
    kind = "syntax-error"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {self.kind}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ScopeError(ParseError):
    kind = "scope-error"


class EvalError(PuqError):
    kind = "evaluation-error"

    def __init__(self, message: str, call: str | None = None):
        text = f"{self.kind}: {message}"
        if call is not None:
            text += f" (in {call})"
        super().__init__(text)
        self.message = message
        self.call = call


class NoMatchingClause(EvalError):
    kind = "no-matching-clause"


class UnknownLocation(EvalError):
    kind = "unknown-location"


class EvalArithmeticError(EvalError):
    kind = "arithmetic-error"


class EvalTypeError(EvalError):
    kind = "type-error"


class BudgetExceeded(EvalError):
    kind = "budget-exceeded"
