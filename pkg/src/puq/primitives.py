"""Primitive operations over constants.

Integer division truncates toward zero and ``mod`` is its companion, so
``a == div(a, b) * b + mod(a, b)`` always holds.
"""

from __future__ import annotations

from .errors import EvalArithmeticError, EvalTypeError
from .syntax import format_const, kind_name, same_const


def _ints(name, args):
    for a in args:
        if type(a) is not int:
            raise EvalTypeError(
                f"{name} expects integers, got {kind_name(a)} {format_const(a)}",
                _show(name, args),
            )


def _show(name, args) -> str:
    return f"{name}({', '.join(format_const(a) for a in args)})"


def _div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _arith(fn):
    def apply(name, args):
        _ints(name, args)
        return fn(*args)

    return apply


def _checked_div(name, args):
    _ints(name, args)
    a, b = args
    if b == 0:
        raise EvalArithmeticError("division by zero", _show(name, args))
    q = _div(a, b)
    return q if name == "div" else a - q * b


def _ite(name, args):
    cond, then, other = args
    if type(cond) is not bool:
        raise EvalTypeError(
            f"ite expects a boolean condition, got {kind_name(cond)} {format_const(cond)}",
            _show(name, args),
        )
    return then if cond else other


def _eq(name, args):
    return same_const(args[0], args[1])


# name -> (arity, implementation taking (name, args))
BUILTINS = {
    "add": (2, _arith(lambda a, b: a + b)),
    "sub": (2, _arith(lambda a, b: a - b)),
    "mul": (2, _arith(lambda a, b: a * b)),
    "div": (2, _checked_div),
    "mod": (2, _checked_div),
    "min": (2, _arith(min)),
    "max": (2, _arith(max)),
    "eq": (2, _eq),
    "lt": (2, _arith(lambda a, b: a < b)),
    "leq": (2, _arith(lambda a, b: a <= b)),
    "ite": (3, _ite),
}

# infix sugar accepted by the parser
OPERATORS = {"+": "add", "-": "sub", "*": "mul", "=": "eq", "<": "lt", "<=": "leq"}


def is_builtin(name: str) -> bool:
    return name in BUILTINS or name in OPERATORS


def apply_builtin(name: str, args):
    """Apply a primitive to already-evaluated constants."""
    name = OPERATORS.get(name, name)
    arity, fn = BUILTINS[name]
    args = tuple(args)
    if len(args) != arity:
        raise EvalTypeError(f"{name} takes {arity} arguments, got {len(args)}", _show(name, args))
    return fn(name, args)
