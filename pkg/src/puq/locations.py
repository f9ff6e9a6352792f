"""Location-labelled definitions: objects, class objects and nested paths.

Concrete objects live in a tree keyed by ``(name, index)`` segments, so
reaching ``/a[4]`` is a dictionary walk rather than a scan.  Class objects
(paths with pattern indices such as ``/a[x+2]``) are kept in source order
and only consulted when a concrete lookup misses; a match creates the
object on the spot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    GROUND,
    PUQ,
    TOP,
    Definition,
    Segment,
    const_key,
    const_expr,
    format_const,
    format_definition,
    format_path,
    format_pattern,
    format_quant,
    format_clause,
    match_pattern,
    substitute,
)


def segment_key(seg: Segment) -> tuple:
    return (seg.name, None if seg.index is None else const_key(seg.index))


def format_concrete_path(path) -> str:
    return format_path(path, format_const)


@dataclass
class ObjectNode:
    """An object: its definitions (most recent memo entries first) and children.

    ``memoizing`` is set on objects instantiated from a ``pforall`` class;
    their ground instance clauses record results like ``pforall`` clauses do.
    """

    path: tuple
    defs: list = field(default_factory=list)
    children: dict = field(default_factory=dict)
    memoizing: bool = False

    def __eq__(self, other):
        if not isinstance(other, ObjectNode):
            return NotImplemented
        return (
            self.path == other.path
            and self.defs == other.defs
            and self.children == other.children
            and self.memoizing == other.memoizing
        )

    def clone(self) -> "ObjectNode":
        return ObjectNode(
            self.path,
            list(self.defs),
            {k: v.clone() for k, v in self.children.items()},
            self.memoizing,
        )


@dataclass(frozen=True)
class ClassEntry:
    path: tuple  # segments whose indices are patterns (or None)
    definition: Definition

    @property
    def quantifier(self) -> str:
        return self.definition.quantifier


@dataclass
class ObjectStore:
    roots: dict = field(default_factory=dict)
    class_entries: list = field(default_factory=list)

    def clone(self) -> "ObjectStore":
        return ObjectStore(
            {k: v.clone() for k, v in self.roots.items()}, list(self.class_entries)
        )

    def is_empty(self) -> bool:
        return not self.roots and not self.class_entries

    def ensure(self, path: tuple) -> ObjectNode:
        """Return the node at ``path``, creating empty intermediate objects."""
        table = self.roots
        node = None
        for i, seg in enumerate(path):
            key = segment_key(seg)
            node = table.get(key)
            if node is None:
                node = ObjectNode(tuple(path[: i + 1]))
                table[key] = node
            table = node.children
        return node

    def add_definition(self, path: tuple, d: Definition) -> None:
        self.ensure(path).defs.append(d)

    def nodes(self):
        """All objects, ordered by path (names lexicographically, indices numerically)."""
        out = []

        def walk(table):
            for node in sorted(table.values(), key=lambda n: _path_order(n.path)):
                out.append(node)
                walk(node.children)

        walk(self.roots)
        return out

    def paths(self) -> list:
        return [node.path for node in self.nodes()]


def _index_order(c):
    if c is None:
        return (0,)
    if c is TOP:
        return (3,)
    if isinstance(c, bool):
        return (2, c)
    return (1, c)


def _path_order(path):
    return tuple((seg.name, _index_order(seg.index)) for seg in path)


def resolve(store: ObjectStore, path: tuple) -> Optional[ObjectNode]:
    """Walk ``path`` through the object tree; ``None`` if any step misses."""
    table = store.roots
    node = None
    for seg in path:
        node = table.get(segment_key(seg))
        if node is None:
            return None
        table = node.children
    return node


def match_class_path(pattern_path: tuple, path: tuple) -> Optional[dict]:
    if len(pattern_path) != len(path):
        return None
    binding: dict = {}
    for pseg, seg in zip(pattern_path, path):
        if pseg.name != seg.name:
            return None
        if pseg.index is None or seg.index is None:
            if pseg.index is not seg.index:
                return None
            continue
        b = match_pattern(pseg.index, seg.index)
        if b is None:
            return None
        binding.update(b)
    return binding


def match_class(store: ObjectStore, path: tuple, counters=None):
    """First class entry whose path pattern matches ``path``, with its binding."""
    for entry in store.class_entries:
        if counters is not None:
            counters.class_scans += 1
        binding = match_class_path(entry.path, path)
        if binding is not None:
            return entry, binding
    return None


def instantiate(store: ObjectStore, entry: ClassEntry, binding: dict, path: tuple) -> ObjectNode:
    """Create the object for ``path`` from a class entry.

    Objects from ``pforall`` classes are stored (and memoize); objects from
    ``forall`` classes are returned without being stored, so they only live
    for the call that needed them.  Instantiating an existing path returns
    the stored object unchanged.
    """
    existing = resolve(store, path)
    if existing is not None:
        return existing
    d = entry.definition
    clause = substitute(d.clause, binding, partial=True)
    rest = tuple(v for v in d.vars if v not in binding)
    if rest:
        inst = Definition(d.quantifier, rest, clause)
    else:
        inst = Definition(GROUND, (), clause)
    if d.quantifier == PUQ:
        node = store.ensure(path)
        node.defs.append(inst)
        node.memoizing = True
        return node
    return ObjectNode(tuple(path), [inst], {}, False)


def format_class_entry(entry: ClassEntry) -> str:
    d = entry.definition
    return f"{format_quant(d)}at {format_path(entry.path, format_pattern)}: {format_clause(d.clause)}"


def format_located(path: tuple, d: Definition) -> str:
    return f"{format_quant(d)}at {format_concrete_path(path)}: {format_clause(d.clause)}"


def dump_store(store: ObjectStore) -> str:
    """Textual listing: an ``at <path>:`` header per object, then its definitions."""
    lines = []
    for node in store.nodes():
        if not node.defs:
            continue
        lines.append(f"at {format_concrete_path(node.path)}:")
        lines.extend("  " + format_definition(d) for d in node.defs)
    if store.class_entries:
        lines.append("classes:")
        lines.extend("  " + format_class_entry(e) for e in store.class_entries)
    return "".join(line + "\n" for line in lines)


def located_source(store: ObjectStore) -> str:
    """Store contents as parseable located definitions."""
    lines = []
    for node in store.nodes():
        lines.extend(format_located(node.path, d) for d in node.defs)
    lines.extend(format_class_entry(e) for e in store.class_entries)
    return "".join(line + "\n" for line in lines)


def eval_located_call(store: ObjectStore, path: tuple, call, budget=None):
    """Evaluate ``path.call`` against ``store``; returns the value and the evolved store.

    ``path`` is concrete: each index is a constant (or ``None``).
    """
    from .evaluator import Evaluator

    exprs = tuple(Segment(s.name, None if s.index is None else const_expr(s.index)) for s in path)
    ev = Evaluator(store=store, budget=budget)
    value = ev.located_call(exprs, call.head, call.args)
    return value, ev.store

