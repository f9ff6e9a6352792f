"""Recursive-descent parser for ``.puq`` source.

Concrete syntax::

    def fib(0) = 1;                                   -- ground
    forall x. def f(x) = x + 1;                       -- blind (no memo)
    pforall x. def fib(x+2) = fib(x+1) + fib(x);      -- parallel (memo)
    at /a[1]: def fib(1) = 1;                         -- located object
    pforall x. at /a[x+2]: def fib(x+2) = /a[x+1].fib(x+1) + /a[x].fib(x);

The ``def`` keyword is optional, which is what lets printed programs be
read back.  Infix ``* + - = < <=`` desugar to builtin calls.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ParseError, ScopeError
from .locations import ClassEntry, ObjectStore, located_source
from .primitives import OPERATORS, is_builtin
from .syntax import (
    BQ,
    GROUND,
    PUQ,
    Call,
    Clause,
    Const,
    Definition,
    LitBool,
    LitInt,
    LitTop,
    LocatedCall,
    Program,
    Segment,
    SuccPat,
    Top,
    Var,
    VarPat,
    is_literal,
    literal_value,
    pattern_vars,
    pretty_print,
)

KEYWORDS = {"def", "forall", "pforall", "at", "top", "true", "false"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>--[^\n]*)|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<op><=|[()\[\],;:.=<+\-*/])"
)


class Token(NamedTuple):
    kind: str  # int, ident, keyword, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and value in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class SourceProgram:
    program: Program = field(default_factory=Program)
    store: ObjectStore = field(default_factory=ObjectStore)
    # (definition, line, column) in file order
    source_map: list = field(default_factory=list, compare=False)

    def to_source(self) -> str:
        return pretty_print(self.program) + located_source(self.store)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.var_uses: list = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            raise self.error(f"expected an integer, found {self.tok.text or 'end of input'!r}")
        return int(self.advance().text)

    # -- definitions

    def program(self) -> SourceProgram:
        defs = []
        store = ObjectStore()
        source_map = []
        while self.tok.kind != "eof":
            start = self.tok
            path, d = self.definition()
            source_map.append((d, start.line, start.col))
            if path is None:
                defs.append(d)
            elif any(seg.index is not None and not is_literal(seg.index) for seg in path):
                store.class_entries.append(ClassEntry(path, d))
            else:
                concrete = tuple(
                    Segment(s.name, None if s.index is None else literal_value(s.index))
                    for s in path
                )
                store.add_definition(concrete, d)
        return SourceProgram(Program(tuple(defs)), store, source_map)

    def definition(self):
        quant, qvars = GROUND, []
        if self.at("forall") or self.at("pforall"):
            quant = BQ if self.advance().text == "forall" else PUQ
            qvars.append(self.expect_ident("a variable"))
            while self.at(","):
                self.advance()
                qvars.append(self.expect_ident("a variable"))
            self.expect(".")
        path = None
        if self.at("at"):
            self.advance()
            path = self.def_path()
            self.expect(":")
        if self.at("def"):
            self.advance()
        head_tok = self.expect_ident("a function name")
        if is_builtin(head_tok.text):
            raise ScopeError(f"{head_tok.text!r} is a builtin and cannot be defined", head_tok.line, head_tok.col)
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.pattern())
            while self.at(","):
                self.advance()
                params.append(self.pattern())
        self.expect(")")
        self.expect("=")
        self.var_uses = []
        body = self.expr()
        self.expect(";")

        # linear within the path and within the head; a class path and its
        # head may share variables (/a[x+2]: fib(x+2))
        bound: dict = {}
        path_pats = [(s.index, s.tok) for s in path or () if s.index is not None]
        for group in (path_pats, params):
            local = set()
            for p, tok in group:
                for v in pattern_vars(p):
                    if v in local:
                        raise ScopeError(f"variable {v!r} occurs twice in the head", tok.line, tok.col)
                    local.add(v)
                    bound.setdefault(v, tok)
        for name, tok in self.var_uses:
            if name not in bound:
                raise ScopeError(f"unbound variable {name!r}", tok.line, tok.col)
        seen = set()
        for tok in qvars:
            if tok.text in seen:
                raise ScopeError(f"variable {tok.text!r} quantified twice", tok.line, tok.col)
            seen.add(tok.text)
            if tok.text not in bound:
                raise ScopeError(f"quantified variable {tok.text!r} does not occur in the head", tok.line, tok.col)
        for v, tok in bound.items():
            if v not in seen:
                raise ScopeError(
                    f"pattern variable {v!r} must be bound by forall or pforall", tok.line, tok.col
                )

        clause = Clause(head_tok.text, tuple(p for p, _ in params), body)
        d = Definition(quant, tuple(t.text for t in qvars), clause)
        if path is not None:
            path = tuple(Segment(s.name, s.index) for s in path)
        return path, d

    def pattern(self):
        tok = self.tok
        if tok.kind == "int":
            return LitInt(int(self.advance().text)), tok
        if self.at("true") or self.at("false"):
            return LitBool(self.advance().text == "true"), tok
        if self.at("top"):
            self.advance()
            return LitTop(), tok
        if self.at("-"):
            raise self.error("pattern literals must be nonnegative")
        name = self.expect_ident("a pattern").text
        if self.at("+"):
            self.advance()
            k_tok = self.tok
            k = self.expect_int()
            if k < 1:
                raise self.error("successor offset must be at least 1", k_tok)
            return SuccPat(name, k), tok
        return VarPat(name), tok

    def def_path(self):
        segs = []
        while True:
            if self.at(".") and self.peek().kind == "op" and self.peek().text == "/" and segs:
                self.advance()
            if not self.at("/"):
                break
            self.advance()
            name = self.expect_ident("a location name").text
            index, tok = None, None
            if self.at("["):
                self.advance()
                index, tok = self.pattern()
                self.expect("]")
            segs.append(_PathSeg(name, index, tok))
        if not segs:
            raise self.error("expected a location path")
        return segs

    # -- expressions

    def expr(self):
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in ("=", "<", "<="):
            op = self.advance().text
            right = self.additive()
            left = Call(OPERATORS[op], (left, right))
            if self.tok.kind == "op" and self.tok.text in ("=", "<", "<="):
                raise self.error("comparisons do not chain; add parentheses")
        return left

    def additive(self):
        left = self.multiplicative()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            left = Call(OPERATORS[op], (left, self.multiplicative()))
        return left

    def multiplicative(self):
        left = self.primary()
        while self.at("*"):
            self.advance()
            left = Call("mul", (left, self.primary()))
        return left

    def primary(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Const(int(tok.text))
        if self.at("-"):
            self.advance()
            if self.tok.kind != "int":
                raise self.error("'-' must be followed by an integer literal here")
            return Const(-int(self.advance().text))
        if self.at("top"):
            self.advance()
            return Top()
        if self.at("true") or self.at("false"):
            self.advance()
            return Const(tok.text == "true")
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("/"):
            return self.located_call()
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                return Call(tok.text, self.args())
            self.var_uses.append((tok.text, tok))
            return Var(tok.text)
        raise self.error(f"expected an expression, found {tok.text or 'end of input'!r}")

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.advance()
                out.append(self.expr())
        self.expect(")")
        return tuple(out)

    def located_call(self):
        segs = []
        while True:
            self.expect("/")
            name = self.expect_ident("a location name").text
            index = None
            if self.at("["):
                self.advance()
                index = self.expr()
                self.expect("]")
            segs.append(Segment(name, index))
            if self.at("/"):
                continue
            if self.at(".") and self.peek().kind == "op" and self.peek().text == "/":
                self.advance()
                continue
            break
        self.expect(".")
        method = self.expect_ident("a method name")
        if is_builtin(method.text):
            raise ScopeError(f"{method.text!r} is a builtin, not a method", method.line, method.col)
        return LocatedCall(tuple(segs), method.text, self.args())


class _PathSeg(NamedTuple):
    name: str
    index: object
    tok: object


def parse_program(text: str) -> SourceProgram:
    """Parse a whole source file into flat definitions and an object store."""
    return _Parser(text).program()


def parse_expr(text: str):
    """Parse one closed expression (REPL and ``--expr`` input)."""
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    if p.var_uses:
        name, tok = p.var_uses[0]
        raise ScopeError(f"free variable {name!r} in expression", tok.line, tok.col)
    return e

