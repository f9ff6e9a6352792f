"""Eager evaluation with backchaining over evolving definitions.

Evaluation alternates between two phases.  ``eval`` reduces an expression
to a constant; on a user call it evaluates the arguments left to right and
hands the ground call to ``backchain``, which picks the first definition
that matches and evaluates its instantiated body.  ``forall`` instances are
thrown away afterwards, ``pforall`` instances leave a ground entry
``h(c...) = K`` at the front of the program.

The program state is threaded strictly left to right through every
sub-evaluation, so a single evolving program per evaluation is equivalent
to passing it in and out of each rule.  Memo entries are kept in an
append-only list and read back-to-front, which makes prepending O(1)
while still scanning the program front to back.

Frames are generators driven by an explicit stack: a frame yields a child
generator and receives the child's value.  Recursion depth is therefore
bounded by ``Budget.max_depth`` and not by the interpreter's call stack.
"""

from __future__ import annotations

import functools
import math
import operator
import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .errors import BudgetExceeded, InternalError, NoMatchingClause, UnknownLocation
from .locations import (
    ObjectNode,
    ObjectStore,
    format_concrete_path,
    instantiate,
    match_class,
    resolve,
)
from .primitives import BUILTINS, apply_builtin
from .syntax import (
    BQ,
    GROUND,
    PUQ,
    TOP,
    Call,
    Clause,
    Const,
    Definition,
    LocatedCall,
    Program,
    Segment,
    SuccPat,
    Top,
    Var,
    VarPat,
    format_const,
    format_definition,
    const_key,
    format_expr,
    ground,
    is_literal,
    literal_value,
    match_params,
    subst_expr,
)

DEFAULT_MAX_STEPS = 10_000_000
DEFAULT_MAX_DEPTH = 100_000


@dataclass
class Counters:
    body_evals_bq: int = 0
    body_evals_puq: int = 0
    body_evals_ground: int = 0
    memo_adds: int = 0
    memo_hits: int = 0
    steps: int = 0
    resolutions: int = 0
    class_scans: int = 0
    instantiations: int = 0

    @property
    def clause_evals(self) -> int:
        """Clause bodies evaluated, memo hits excluded."""
        return self.body_evals_bq + self.body_evals_puq + self.body_evals_ground

    def as_dict(self) -> dict:
        d = asdict(self)
        d["clause_evals"] = self.clause_evals
        return d


@dataclass(frozen=True)
class Budget:
    max_steps: Optional[int] = None
    max_depth: Optional[int] = None

    @classmethod
    def default(cls) -> "Budget":
        steps = int(os.environ.get("PUQ_MAX_STEPS", DEFAULT_MAX_STEPS))
        return cls(steps, DEFAULT_MAX_DEPTH)


UNLIMITED = Budget()


# ---------------------------------------------------------------- tracing


def _field(value) -> str:
    text = str(value)
    if text and not any(ch in text for ch in ' "=\\\t\n'):
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_record(name: str, fields: dict) -> str:
    return " ".join([f"event={name}"] + [f"{k}={_field(v)}" for k, v in fields.items()])


def _show_call(head, args) -> str:
    return f"{head}({', '.join(format_const(a) for a in args)})"


@dataclass(frozen=True)
class EvalEnter:
    expr: object

    def format(self) -> str:
        return format_record("eval_enter", {"expr": format_expr(self.expr)})


@dataclass(frozen=True)
class BackchainMatch:
    index: int
    quantifier: str
    call: str
    location: Optional[str] = None

    def format(self) -> str:
        fields = {"index": self.index, "quantifier": self.quantifier, "call": self.call}
        if self.location is not None:
            fields["at"] = self.location
        return format_record("backchain_match", fields)


@dataclass(frozen=True)
class MemoAdd:
    definition: Definition
    location: Optional[str] = None

    def format(self) -> str:
        fields = {"def": format_definition(self.definition)}
        if self.location is not None:
            fields["at"] = self.location
        return format_record("memo_add", fields)


@dataclass(frozen=True)
class MemoHit:
    call: str
    value: object

    def format(self) -> str:
        return format_record("memo_hit", {"call": self.call, "value": format_const(self.value)})


@dataclass(frozen=True)
class BuiltinApply:
    name: str
    args: tuple
    result: object

    def format(self) -> str:
        return format_record(
            "builtin_apply",
            {
                "name": self.name,
                "args": ",".join(format_const(a) for a in self.args),
                "result": format_const(self.result),
            },
        )


TraceEvent = (EvalEnter, BackchainMatch, MemoAdd, MemoHit, BuiltinApply)


@dataclass
class EvalOutcome:
    value: object
    evolved: Program
    stats: Counters
    store: ObjectStore = field(default_factory=ObjectStore)


# ---------------------------------------------------------------- machine

_HIT = object()

_INT_OPS = {"add": operator.add, "sub": operator.sub, "mul": operator.mul, "lt": operator.lt, "leq": operator.le}


def _apply(head, vals):
    if len(vals) == 2:
        op = _INT_OPS.get(head)
        if op is not None and type(vals[0]) is int and type(vals[1]) is int:
            return op(vals[0], vals[1])
    return apply_builtin(head, vals)


def _args_key(args):
    """Comparison key for argument tuples that keeps ``1`` and ``True`` apart."""
    for a in args:
        if type(a) is not int:
            return tuple(const_key(x) for x in args)
    return args


@functools.lru_cache(maxsize=None)
def _matcher(params):
    """Specialise parameter matching for one clause head."""
    if all(is_literal(p) for p in params):
        want = _args_key(tuple(literal_value(p) for p in params))
        return lambda args, akey: {} if akey == want else None
    if len(params) == 1:
        p = params[0]
        if type(p) is VarPat:
            name = p.name
            return lambda args, akey: {name: args[0]}
        if type(p) is SuccPat:
            name, k = p.name, p.offset

            def succ(args, akey):
                a = args[0]
                if type(a) is int and a >= k:
                    return {name: a - k}
                return None

            return succ
    return lambda args, akey: match_params(params, args)


def _frame_call(gen):
    frame = getattr(gen, "gi_frame", None)
    expr = frame.f_locals.get("expr") if frame is not None else None
    return format_expr(expr) if expr is not None else None



class Evaluator:
    """One evaluation context owning its program and store snapshot.

    Successive calls on the same evaluator share the evolving state, which
    is what a REPL session wants.
    """

    def __init__(
        self,
        program: Program = Program(),
        store: ObjectStore | None = None,
        budget: Budget | None = None,
        trace: Callable | None = None,
    ):
        self.source = tuple(program.defs)
        self.memo: list = []
        self._memo_keys: list = []
        self._by_head: dict = {}
        for j, d in enumerate(self.source):
            cl = d.clause
            self._by_head.setdefault((cl.head, len(cl.params)), []).append(
                (j, d, _matcher(cl.params))
            )
        self.store = store.clone() if store is not None else ObjectStore()
        self.budget = budget or UNLIMITED
        self.trace = trace
        self.counters = Counters()
        self._max_steps = self.budget.max_steps if self.budget.max_steps is not None else math.inf
        self._max_depth = self.budget.max_depth if self.budget.max_depth is not None else math.inf

    @property
    def program(self) -> Program:
        return Program(tuple(reversed(self.memo)) + self.source)

    # -- driver

    def _run(self, expr, env=None, scope=None):
        value, gen = self._start(expr, env or {}, scope)
        if gen is None:
            return value
        return self._drive(gen)

    def _drive(self, gen):
        stack = [gen]
        push = stack.append
        max_depth = self._max_depth
        value = None
        while stack:
            try:
                child = stack[-1].send(value)
            except StopIteration as stop:
                stack.pop()
                value = stop.value
                continue
            if len(stack) >= max_depth:
                raise BudgetExceeded(f"depth limit {max_depth} exceeded", _frame_call(child))
            push(child)
            value = None
        return value

    def _start(self, expr, env, scope):
        """Begin evaluating ``expr``: either ``(value, None)`` or ``(None, frame)``."""
        c = self.counters
        c.steps += 1
        if c.steps > self._max_steps:
            raise BudgetExceeded(f"step limit {self._max_steps} exceeded", format_expr(expr))
        tracing = self.trace is not None
        if tracing:
            self.trace(EvalEnter(subst_expr(expr, env) if env else expr))
        t = type(expr)
        if t is Const:
            return expr.value, None
        if t is Var:
            try:
                return env[expr.name], None
            except KeyError:
                raise InternalError(f"free variable {expr.name} reached evaluation") from None
        if t is Call:
            head = expr.head
            if head not in BUILTINS:
                return None, self._call_frame(expr, env, scope)
            if not tracing:
                # builtin over atoms: no frame needed
                vals = []
                for a in expr.args:
                    ta = type(a)
                    if ta is Const:
                        vals.append(a.value)
                    elif ta is Var and a.name in env:
                        vals.append(env[a.name])
                    else:
                        return None, self._builtin_frame(expr, env, scope)
                c.steps += len(vals)
                return _apply(head, vals), None
            return None, self._builtin_frame(expr, env, scope)
        if t is LocatedCall:
            return None, self._located_frame(expr, env, scope)
        if t is Top:
            return TOP, None
        raise InternalError(f"cannot evaluate {expr!r}")

    # -- frames

    def _args_frame(self, args, env, scope):
        start = self._start
        out = []
        for a in args:
            v, g = start(a, env, scope)
            if g is not None:
                v = yield g
            out.append(v)
        return tuple(out)

    def _builtin_frame(self, expr, env, scope):
        start = self._start
        args = []
        for a in expr.args:
            v, g = start(a, env, scope)
            if g is not None:
                v = yield g
            args.append(v)
        result = _apply(expr.head, args)
        if self.trace is not None:
            self.trace(BuiltinApply(expr.head, tuple(args), result))
        return result

    def _call_frame(self, expr, env, scope):
        start = self._start
        args = []
        for a in expr.args:
            if type(a) is Const and self.trace is None:
                self.counters.steps += 1
                args.append(a.value)
                continue
            v, g = start(a, env, scope)
            if g is not None:
                v = yield g
            args.append(v)
        args = tuple(args)
        head = expr.head
        found = self._select(head, args, scope)
        if found is None:
            raise self._no_match(head, args, scope)
        index, d, binding = found
        if self.trace is None and d.quantifier == BQ:
            self.counters.body_evals_bq += 1
            v, g = start(d.clause.body, binding, scope)
            if g is not None:
                v = yield g
            return v
        body, benv, memoize = self._enter(index, d, binding, head, args, scope)
        if body is _HIT:
            return benv
        v, g = start(body, benv, scope)
        if g is not None:
            v = yield g
        if memoize:
            self._memoize(head, args, v, scope)
        return v

    def _located_frame(self, expr, env, scope):
        start = self._start
        segs = []
        for seg in expr.path:
            if seg.index is None:
                segs.append(seg)
                continue
            v, g = start(seg.index, env, scope)
            if g is not None:
                v = yield g
            segs.append(Segment(seg.name, v))
        args = []
        for a in expr.args:
            v, g = start(a, env, scope)
            if g is not None:
                v = yield g
            args.append(v)
        args = tuple(args)
        head = expr.head
        node = self._locate(tuple(segs), head, args)
        found = self._select(head, args, node)
        if found is None:
            raise self._no_match(head, args, node)
        body, benv, memoize = self._enter(*found, head, args, node)
        if body is _HIT:
            return benv
        v, g = start(body, benv, node)
        if g is not None:
            v = yield g
        if memoize:
            self._memoize(head, args, v, node)
        return v

    def _dispatch_frame(self, index, d, binding, head, args, scope):
        body, benv, memoize = self._enter(index, d, binding, head, args, scope)
        if body is _HIT:
            return benv
        v, g = self._start(body, benv, scope)
        if g is not None:
            v = yield g
        if memoize:
            self._memoize(head, args, v, scope)
        return v

    def _locate(self, path, head, args) -> ObjectNode:
        c = self.counters
        c.resolutions += 1
        node = resolve(self.store, path)
        if node is not None:
            return node
        found = match_class(self.store, path, c)
        if found is None:
            where = format_concrete_path(path)
            raise UnknownLocation(f"no object or class at {where}", f"{where}.{_show_call(head, args)}")
        entry, binding = found
        c.instantiations += 1
        return instantiate(self.store, entry, binding, path)

    # -- backchaining

    def _select(self, head, args, scope):
        """First matching definition as ``(index, definition, binding)``.

        Every memo entry is inspected front to back.  Source definitions are
        pre-grouped by head and arity, which cannot change which definition
        matches first; steps still count every definition passed over.
        """
        c = self.counters
        akey = _args_key(args)
        if scope is not None:
            for j, d in enumerate(scope.defs):
                cl = d.clause
                if cl.head == head and len(cl.params) == len(args):
                    b = _matcher(cl.params)(args, akey)
                    if b is not None:
                        c.steps += j + 1
                        return j, d, b
            c.steps += len(scope.defs)
            return None
        keys = self._memo_keys
        m = len(keys)
        if m:
            want = (head, akey)
            for i in range(m - 1, -1, -1):
                if keys[i] == want:
                    c.steps += m - i
                    return m - 1 - i, self.memo[i], {}
            c.steps += m
        for j, d, match in self._by_head.get((head, len(args)), ()):
            b = match(args, akey)
            if b is not None:
                c.steps += j + 1
                return m + j, d, b
        c.steps += len(self.source)
        return None

    def _no_match(self, head, args, scope):
        call = _show_call(head, args)
        if scope is None:
            return NoMatchingClause(f"no definition matches {call}", call)
        where = format_concrete_path(scope.path)
        return NoMatchingClause(f"no definition of {call} at {where}", f"{where}.{call}")

    def _enter(self, index, d, binding, head, args, scope):
        """Account for a selected definition.

        Returns ``(body, env, memoize)``; a memo hit returns ``(_HIT, value, False)``.
        """
        c = self.counters
        q = d.quantifier
        if self.trace is not None:
            self.trace(
                BackchainMatch(
                    index,
                    q,
                    _show_call(head, args),
                    None if scope is None else format_concrete_path(scope.path),
                )
            )
        if q == BQ:
            c.body_evals_bq += 1
            return d.clause.body, binding, False
        if q == PUQ:
            c.body_evals_puq += 1
            return d.clause.body, binding, True
        body = d.clause.body
        if d.memo:
            c.memo_hits += 1
            value = TOP if type(body) is Top else body.value
            if self.trace is not None:
                self.trace(MemoHit(_show_call(head, args), value))
            return _HIT, value, False
        if scope is not None and scope.memoizing:
            c.body_evals_puq += 1
            return body, binding, True
        c.body_evals_ground += 1
        return body, binding, False

    def _memoize(self, head, args, value, scope):
        entry = ground(head, args, value)
        if scope is None:
            self.memo.append(entry)
            self._memo_keys.append((head, _args_key(args)))
        else:
            scope.defs.insert(0, entry)
        self.counters.memo_adds += 1
        if self.trace is not None:
            self.trace(
                MemoAdd(entry, None if scope is None else format_concrete_path(scope.path))
            )

    # -- public entry points

    def eval(self, expr):
        return self._run(expr)

    def eval_args(self, args) -> tuple:
        return self._drive(self._args_frame(tuple(args), {}, None))

    def backchain(self, search: Program, head: str, args):
        """Select from ``search`` (first match) and evaluate under the current state."""
        args = tuple(args)
        for i, d in enumerate(search.defs):
            cl = d.clause
            if cl.head == head and len(cl.params) == len(args):
                b = match_params(cl.params, args)
                if b is not None:
                    return self._drive(self._dispatch_frame(i, d, b, head, args, None))
        raise self._no_match(head, args, None)

    def located_call(self, path, head: str, args):
        return self._run(LocatedCall(tuple(path), head, tuple(args)))

    def outcome(self, value) -> EvalOutcome:
        return EvalOutcome(value, self.program, self.counters, self.store)


def evaluate(
    program: Program,
    expr,
    budget: Budget | None = None,
    store: ObjectStore | None = None,
    trace: Callable | None = None,
) -> EvalOutcome:
    """Evaluate a closed expression; returns its value and the evolved program and store."""
    ev = Evaluator(program, store, budget, trace)
    value = ev.eval(expr)
    return ev.outcome(value)


def eval_args(program: Program, args, budget: Budget | None = None):
    ev = Evaluator(program, budget=budget)
    values = ev.eval_args(args)
    return values, ev.program


def backchain(search: Program, state: Program, call: Call, budget: Budget | None = None):
    ev = Evaluator(state, budget=budget)
    args = tuple(_ground_arg(a) for a in call.args)
    value = ev.backchain(search, call.head, args)
    return value, ev.program


def _ground_arg(a):
    if type(a) is Const:
        return a.value
    if type(a) is Top:
        return TOP
    if type(a) in (int, bool) or a is TOP:
        return a
    raise InternalError(f"backchain needs constant arguments, got {format_expr(a)}")


def apply_ground(defn: Definition, state: Program, call: Call, budget: Budget | None = None):
    if defn.quantifier != GROUND:
        raise InternalError("apply_ground needs a ground definition")
    return backchain(Program((defn,)), state, call, budget)


def bc_b(instance: Clause, state: Program, budget: Budget | None = None):
    """Evaluate a ground ``forall`` instance; nothing is kept."""
    ev = Evaluator(state, budget=budget)
    ev.counters.body_evals_bq += 1
    value = ev.eval(instance.body)
    return value, ev.program


def bc_p(instance: Clause, state: Program, budget: Budget | None = None):
    """Evaluate a ground ``pforall`` instance and keep ``h(c...) = K`` in front."""
    ev = Evaluator(state, budget=budget)
    ev.counters.body_evals_puq += 1
    value = ev.eval(instance.body)
    args = tuple(literal_value(p) for p in instance.params)
    ev._memoize(instance.head, args, value, None)
    return value, ev.program
