"""Independent reference computations for the test-suite.

Nothing here imports the evaluator.  ``RefInterp`` is a direct recursive
reading of the evaluation rules over plain tuples of definitions, with its
own pattern matching and arithmetic, so it can serve as a cross-check.
"""

from __future__ import annotations

import sys
from math import comb

from puq.syntax import (
    BQ,
    GROUND,
    PUQ,
    TOP,
    Call,
    Clause,
    Const,
    Definition,
    LitBool,
    LitInt,
    LitTop,
    SuccPat,
    Top,
    Var,
    VarPat,
)


def fib_iter(n: int) -> int:
    """F(0) = F(1) = 1."""
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def fib_naive_calls(n: int) -> int:
    """Count calls made by the textbook doubly-recursive fib, by brute force."""
    calls = 0

    def go(k):
        nonlocal calls
        calls += 1
        if k < 2:
            return 1
        return go(k - 1) + go(k - 2)

    go(n)
    return calls


def fib_bq_clause_evals(n: int) -> int:
    """Closed form for the same count: 2 F(n) - 1."""
    return 2 * fib_iter(n) - 1


def trib_iter(n: int) -> int:
    """T(0)=0, T(1)=T(2)=1."""
    a, b, c = 0, 1, 1
    for _ in range(n):
        a, b, c = b, c, a + b + c
    return a


def grid_paths(m: int, n: int) -> int:
    return comb(m + n, m)


# --------------------------------------------------------------- reference


class NoMatch(Exception):
    pass


def _match(p, c):
    if isinstance(p, VarPat):
        return {p.name: c}
    if isinstance(p, SuccPat):
        if isinstance(c, int) and not isinstance(c, bool) and c >= p.offset:
            return {p.name: c - p.offset}
        return None
    if isinstance(p, LitInt):
        return {} if isinstance(c, int) and not isinstance(c, bool) and c == p.k else None
    if isinstance(p, LitBool):
        return {} if isinstance(c, bool) and c == p.b else None
    if isinstance(p, LitTop):
        return {} if c is TOP else None
    raise TypeError(p)


def _lit(c):
    if c is TOP:
        return LitTop()
    if isinstance(c, bool):
        return LitBool(c)
    return LitInt(c)


_PRIMS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "min": min,
    "max": max,
    "lt": lambda a, b: a < b,
    "leq": lambda a, b: a <= b,
    "eq": lambda a, b: type(a) is type(b) and a == b,
    "ite": lambda c, a, b: a if c else b,
}


class RefInterp:
    """Recursive reference evaluator.

    ``literal_args=True`` follows the argument rule to the letter: each
    argument is evaluated under the same program and the resulting programs
    are conjoined (concatenated) before the call.  With ``False`` the
    program is threaded left to right.  ``memo=False`` ignores ``pforall``
    and never extends the program.
    """

    def __init__(self, literal_args=False, memo=True):
        self.literal_args = literal_args
        self.memo = memo
        self.bodies = 0

    def eval(self, D: tuple, e):
        if isinstance(e, Const):
            return e.value, D
        if isinstance(e, Top):
            return TOP, D
        if isinstance(e, Var):
            raise ValueError(f"free variable {e.name}")
        if isinstance(e, Call):
            vals = []
            if self.literal_args and e.args:
                outs = []
                for a in e.args:
                    v, Di = self.eval(D, a)
                    vals.append(v)
                    outs.append(Di)
                D2 = tuple(d for Di in outs for d in Di)
            else:
                D2 = D
                for a in e.args:
                    v, D2 = self.eval(D2, a)
                    vals.append(v)
            if e.head in _PRIMS:
                return _PRIMS[e.head](*vals), D2
            return self.bc(D2, e.head, tuple(vals))
        raise TypeError(e)

    def bc(self, D, head, args):
        for d in D:
            cl = d.clause
            if cl.head != head or len(cl.params) != len(args):
                continue
            binding = {}
            ok = True
            for p, c in zip(cl.params, args):
                b = _match(p, c)
                if b is None:
                    ok = False
                    break
                binding.update(b)
            if not ok:
                continue
            body = _subst(cl.body, binding)
            self.bodies += 1
            K, D2 = self.eval(D, body)
            if d.quantifier == PUQ and self.memo:
                entry = Definition(GROUND, (), Clause(head, tuple(_lit(a) for a in args), Const(K) if K is not TOP else Top()))
                return K, (entry,) + D2
            return K, D2
        raise NoMatch(f"{head}{args}")


def _subst(e, b):
    if isinstance(e, Var):
        c = b[e.name]
        return Top() if c is TOP else Const(c)
    if isinstance(e, Call):
        return Call(e.head, tuple(_subst(a, b) for a in e.args))
    return e


def ref_eval(defs, expr, **kw):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        interp = RefInterp(**kw)
        value, D = interp.eval(tuple(defs), expr)
        return value, D, interp
    finally:
        sys.setrecursionlimit(old)


__all__ = [
    "BQ",
    "NoMatch",
    "RefInterp",
    "fib_bq_clause_evals",
    "fib_iter",
    "fib_naive_calls",
    "grid_paths",
    "ref_eval",
    "trib_iter",
]
