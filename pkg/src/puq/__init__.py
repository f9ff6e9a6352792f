"""An interpreter for evolving recursive definitions.

``forall`` definitions behave like ordinary recursion; ``pforall``
definitions keep every instance they compute as a ground entry at the
front of the program, which gives memoization for free.
"""

from .errors import (
    BudgetExceeded,
    EvalArithmeticError,
    EvalError,
    EvalTypeError,
    NoMatchingClause,
    ParseError,
    PuqError,
    ScopeError,
    UnknownLocation,
)
from .evaluator import Budget, Counters, EvalOutcome, Evaluator, evaluate
from .locations import ObjectStore, dump_store, resolve
from .parser import SourceProgram, parse_expr, parse_program
from .syntax import TOP, Program, pretty_print

__all__ = [
    "Budget",
    "BudgetExceeded",
    "Counters",
    "EvalArithmeticError",
    "EvalError",
    "EvalOutcome",
    "EvalTypeError",
    "Evaluator",
    "NoMatchingClause",
    "ObjectStore",
    "ParseError",
    "Program",
    "PuqError",
    "ScopeError",
    "SourceProgram",
    "TOP",
    "UnknownLocation",
    "dump_store",
    "evaluate",
    "parse_expr",
    "parse_program",
    "pretty_print",
    "resolve",
]
