"""Abstract syntax for programs of evolving recursive definitions.

Constants are plain Python values: ``int`` (arbitrary precision), ``bool``
and the :data:`TOP` singleton.  Because ``bool`` is a subclass of ``int``,
constant comparison must go through :func:`same_const` rather than ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import InternalError


class _Top:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TOP"

    def __reduce__(self):
        return (_Top, ())


TOP = _Top()

Constant = Union[int, bool, _Top]


def is_constant(value) -> bool:
    return isinstance(value, (int, _Top))


def same_const(a, b) -> bool:
    """Value equality that keeps integers, booleans and top apart."""
    return a is b or (type(a) is type(b) and a == b)


def const_key(c) -> tuple:
    """Hashable key for a constant; ``1`` and ``True`` get different keys."""
    return (type(c).__name__, c)


def format_const(c) -> str:
    if c is TOP:
        return "top"
    if c is True:
        return "true"
    if c is False:
        return "false"
    return str(c)


def kind_name(c) -> str:
    if c is TOP:
        return "top"
    if isinstance(c, bool):
        return "boolean"
    return "integer"


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Const:
    value: Constant

    def __eq__(self, other):
        return type(other) is Const and same_const(self.value, other.value)

    def __hash__(self):
        return hash(const_key(self.value))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    head: str
    args: tuple = ()


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Segment:
    """One step of a location path.

    ``index`` is ``None`` or, depending on where the path occurs, an
    expression (located calls), a constant (concrete object keys) or a
    pattern (class objects).
    """

    name: str
    index: object = None


@dataclass(frozen=True)
class LocatedCall:
    path: tuple  # of Segment with expression indices
    head: str
    args: tuple = ()


Expr = Union[Const, Var, Call, LocatedCall, Top]


def const_expr(c) -> Expr:
    return Top() if c is TOP else Const(c)


# ------------------------------------------------------------------- patterns


@dataclass(frozen=True)
class LitInt:
    k: int


@dataclass(frozen=True)
class LitBool:
    b: bool


@dataclass(frozen=True)
class LitTop:
    pass


@dataclass(frozen=True)
class VarPat:
    name: str


@dataclass(frozen=True)
class SuccPat:
    name: str
    offset: int

    def __post_init__(self):
        if self.offset < 1:
            raise ValueError(f"successor offset must be positive, got {self.offset}")


Pattern = Union[LitInt, LitBool, LitTop, VarPat, SuccPat]


def literal_pattern(c) -> Pattern:
    if c is TOP:
        return LitTop()
    if isinstance(c, bool):
        return LitBool(c)
    return LitInt(c)


def pattern_vars(p) -> tuple:
    if isinstance(p, (VarPat, SuccPat)):
        return (p.name,)
    return ()


def is_literal(p) -> bool:
    return isinstance(p, (LitInt, LitBool, LitTop))


def literal_value(p):
    if isinstance(p, LitInt):
        return p.k
    if isinstance(p, LitBool):
        return p.b
    if isinstance(p, LitTop):
        return TOP
    raise InternalError(f"pattern {p!r} is not a literal")


def match_pattern(p, c) -> Optional[dict]:
    """Match one parameter pattern against a constant.

    Returns the binding on success and ``None`` when the pattern does not
    apply.  ``x+k`` only matches integers ``c >= k`` (natural-number reading).
    """
    tp = type(p)
    if tp is VarPat:
        return {p.name: c}
    if tp is LitInt:
        return {} if type(c) is int and c == p.k else None
    if tp is SuccPat:
        if type(c) is int and c >= p.offset:
            return {p.name: c - p.offset}
        return None
    if tp is LitBool:
        return {} if type(c) is bool and c == p.b else None
    if tp is LitTop:
        return {} if c is TOP else None
    raise InternalError(f"unknown pattern {p!r}")


def match_params(params: tuple, args: tuple) -> Optional[dict]:
    if len(params) != len(args):
        return None
    binding: dict = {}
    for p, c in zip(params, args):
        b = match_pattern(p, c)
        if b is None:
            return None
        binding.update(b)
    return binding


def instantiate_pattern(p, c_binding: dict):
    """Apply a binding to a pattern, giving a literal pattern when it is fully bound."""
    if isinstance(p, VarPat) and p.name in c_binding:
        return literal_pattern(c_binding[p.name])
    if isinstance(p, SuccPat) and p.name in c_binding:
        base = c_binding[p.name]
        if type(base) is not int:
            raise InternalError(f"cannot add {p.offset} to {format_const(base)}")
        return LitInt(base + p.offset)
    return p


# -------------------------------------------------------------- definitions


@dataclass(frozen=True)
class Clause:
    head: str
    params: tuple = ()
    body: Expr = field(default_factory=Top)

    @property
    def arity(self) -> int:
        return len(self.params)

    def is_ground(self) -> bool:
        return all(is_literal(p) for p in self.params) and not free_vars(self.body)


GROUND = "ground"
BQ = "bq"
PUQ = "puq"


@dataclass(frozen=True)
class Definition:
    """A clause together with its quantifier kind.

    ``memo`` marks ground entries produced by memoization; it is bookkeeping
    only and does not take part in equality.
    """

    quantifier: str
    vars: tuple
    clause: Clause
    memo: bool = field(default=False, compare=False)

    @property
    def head(self) -> str:
        return self.clause.head


def ground(head: str, args, value) -> Definition:
    """A memo entry ``head(args) = value``."""
    params = tuple(literal_pattern(a) for a in args)
    return Definition(GROUND, (), Clause(head, params, const_expr(value)), memo=True)


@dataclass(frozen=True)
class Program:
    defs: tuple = ()

    def __len__(self) -> int:
        return len(self.defs)

    def __iter__(self):
        return iter(self.defs)

    def prepend(self, d: Definition) -> "Program":
        return Program((d,) + self.defs)

    def has_suffix(self, other: "Program") -> bool:
        n = len(other.defs)
        return n <= len(self.defs) and self.defs[len(self.defs) - n:] == other.defs


# -------------------------------------------------------------- substitution


_FOLDABLE = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


def free_vars(e) -> set:
    t = type(e)
    if t is Var:
        return {e.name}
    if t is Call:
        out: set = set()
        for a in e.args:
            out |= free_vars(a)
        return out
    if t is LocatedCall:
        out = set()
        for seg in e.path:
            if seg.index is not None:
                out |= free_vars(seg.index)
        for a in e.args:
            out |= free_vars(a)
        return out
    return set()


def subst_expr(e, binding: dict):
    """Replace variables by constants.

    Integer ``add``/``sub``/``mul`` applications whose operands become
    constants are folded, so ``fib(x+1)`` at ``x=1`` reads ``fib(2)``.
    These three operations are total on integers, so folding never hides
    an error the evaluator would have raised.
    """
    t = type(e)
    if t is Var:
        if e.name in binding:
            return const_expr(binding[e.name])
        return e
    if t is Call:
        args = tuple(subst_expr(a, binding) for a in e.args)
        fold = _FOLDABLE.get(e.head)
        if (
            fold is not None
            and len(args) == 2
            and type(args[0]) is Const
            and type(args[1]) is Const
            and type(args[0].value) is int
            and type(args[1].value) is int
        ):
            return Const(fold(args[0].value, args[1].value))
        return Call(e.head, args)
    if t is LocatedCall:
        path = tuple(
            Segment(s.name, None if s.index is None else subst_expr(s.index, binding))
            for s in e.path
        )
        return LocatedCall(path, e.head, tuple(subst_expr(a, binding) for a in e.args))
    return e


def substitute(clause: Clause, binding: dict, partial: bool = False) -> Clause:
    """Instantiate a clause under ``binding``.

    With ``partial=False`` the result must be ground; a leftover variable
    means a non-closed clause slipped past the parser.
    """
    params = tuple(instantiate_pattern(p, binding) for p in clause.params)
    body = subst_expr(clause.body, binding)
    out = Clause(clause.head, params, body)
    if not partial and not out.is_ground():
        left = sorted(
            {v for p in params for v in pattern_vars(p)} | free_vars(body)
        )
        raise InternalError(
            f"unbound variable(s) {', '.join(left)} after substituting into {clause.head}"
        )
    return out


# ------------------------------------------------------------------ printing

_INFIX = {"add": ("+", 1), "sub": ("-", 1), "mul": ("*", 2), "eq": ("=", 0), "lt": ("<", 0), "leq": ("<=", 0)}


def format_pattern(p) -> str:
    if isinstance(p, VarPat):
        return p.name
    if isinstance(p, SuccPat):
        return f"{p.name}+{p.offset}"
    return format_const(literal_value(p))


def format_path(path, index_fmt=None) -> str:
    out = []
    for seg in path:
        if seg.index is None:
            out.append(f"/{seg.name}")
        else:
            out.append(f"/{seg.name}[{index_fmt(seg.index)}]")
    return "".join(out)


def _is_infix(e) -> bool:
    return type(e) is Call and e.head in _INFIX and len(e.args) == 2


def format_expr(e, prec: int = 0) -> str:
    t = type(e)
    if t is Const:
        return format_const(e.value)
    if t is Top:
        return "top"
    if t is Var:
        return e.name
    if t is LocatedCall:
        args = ", ".join(format_expr(a) for a in e.args)
        return f"{format_path(e.path, format_expr)}.{e.head}({args})"
    if t is Call:
        if _is_infix(e):
            op, p = _INFIX[e.head]
            left, right = e.args
            if (
                e.head == "add"
                and type(left) is Var
                and type(right) is Const
                and type(right.value) is int
                and right.value > 0
            ):
                text = f"{left.name}+{right.value}"
            elif p == 0:
                text = f"{format_expr(left, 1)} {op} {format_expr(right, 1)}"
            else:
                text = f"{format_expr(left, p)} {op} {format_expr(right, p + 1)}"
            return f"({text})" if p < prec else text
        args = ", ".join(format_expr(a) for a in e.args)
        return f"{e.head}({args})"
    raise InternalError(f"cannot print {e!r}")


def format_quant(d: Definition) -> str:
    if d.quantifier == GROUND:
        return ""
    word = "forall" if d.quantifier == BQ else "pforall"
    return f"{word} {', '.join(d.vars)}. "


def format_clause(c: Clause) -> str:
    params = ", ".join(format_pattern(p) for p in c.params)
    return f"{c.head}({params}) = {format_expr(c.body)};"


def format_definition(d: Definition) -> str:
    return format_quant(d) + format_clause(d.clause)


def pretty_print(program: Program) -> str:
    """One definition per line, in program order, in parseable concrete syntax."""
    return "".join(format_definition(d) + "\n" for d in program.defs)
