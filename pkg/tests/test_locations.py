import pytest

from oracles import fib_iter
from puq import Budget, Evaluator, UnknownLocation, dump_store, evaluate, parse_expr, parse_program, resolve
from puq.errors import NoMatchingClause
from puq.locations import eval_located_call, instantiate, match_class
from puq.syntax import GROUND, PUQ, Call, Clause, Const, LocatedCall, Segment, format_clause, format_expr


def path(*segs):
    return tuple(Segment(name, idx) for name, idx in segs)


def clauses_at(store, p):
    node = resolve(store, p)
    return None if node is None else [format_clause(d.clause) for d in node.defs]


def run(sp, text):
    return evaluate(sp.program, parse_expr(text), store=sp.store)


# ------------------------------------------------------------------ resolve


def test_resolve_concrete_object(fib_oop):
    assert clauses_at(fib_oop.store, path(("a", 1))) == ["fib(1) = 1;"]


def test_resolve_misses_uninstantiated_object(fib_oop):
    assert resolve(fib_oop.store, path(("a", 7))) is None


def test_resolve_nested(nested):
    assert clauses_at(nested.store, path(("a", None), ("b", 1))) == ["g(1) = 2;"]
    assert resolve(nested.store, path(("a", None))) is not None
    assert resolve(nested.store, path(("b", 1))) is None


def test_index_kinds_are_distinct_keys():
    sp = parse_program("at /o[1]: def f() = 1; at /o[true]: def f() = 2;")
    assert run(sp, "/o[1].f()").value == 1
    assert run(sp, "/o[true].f()").value == 2


# -------------------------------------------------------------- match_class


def test_match_class_binds_offset(fib_oop):
    entry, binding = match_class(fib_oop.store, path(("a", 4)))
    assert binding == {"x": 2} and entry.quantifier == PUQ


@pytest.mark.parametrize("p", [path(("a", 1)), path(("c", 4)), path(("a", None)), path(("a", 4), ("b", 1))])
def test_match_class_misses(fib_oop, p):
    assert match_class(fib_oop.store, p) is None


# -------------------------------------------------------------- instantiate


def test_instantiate_a4(fib_oop):
    store = fib_oop.store.clone()
    entry, binding = match_class(store, path(("a", 4)))
    node = instantiate(store, entry, binding, path(("a", 4)))
    assert [format_clause(d.clause) for d in node.defs] == ["fib(4) = /a[3].fib(3) + /a[2].fib(2);"]
    assert node.defs[0].quantifier == GROUND and node.memoizing
    assert resolve(store, path(("a", 4))) is node


def test_instantiate_a3(fib_oop):
    store = fib_oop.store.clone()
    entry, binding = match_class(store, path(("a", 3)))
    node = instantiate(store, entry, binding, path(("a", 3)))
    assert format_clause(node.defs[0].clause) == "fib(3) = /a[2].fib(2) + /a[1].fib(1);"


def test_instantiate_twice_is_noop(fib_oop):
    store = fib_oop.store.clone()
    entry, binding = match_class(store, path(("a", 5)))
    first = instantiate(store, entry, binding, path(("a", 5)))
    snapshot = store.clone()
    second = instantiate(store, entry, binding, path(("a", 5)))
    assert first is second and store == snapshot


def test_bq_class_instances_are_transient():
    sp = parse_program("forall x. at /sq[x]: def v() = x * x;")
    out = run(sp, "/sq[7].v() + /sq[7].v()")
    assert out.value == 98
    assert out.store.paths() == []
    assert out.stats.instantiations == 2


def test_class_with_remaining_method_variables():
    sp = parse_program("pforall x, y. at /add[x]: def plus(y) = x + y;")
    ev = Evaluator(sp.program, sp.store)
    assert ev.eval(parse_expr("/add[3].plus(4)")) == 7
    assert ev.eval(parse_expr("/add[3].plus(4)")) == 7
    assert ev.counters.memo_hits == 1
    assert clauses_at(ev.store, path(("add", 3))) == ["plus(4) = 7;", "plus(y) = 3 + y;"]


# ------------------------------------------------------- eval_located_call


def test_fib_oop_worked_example(fib_oop):
    out = run(fib_oop, "/fib.fib(4)")
    assert out.value == 3
    a3 = resolve(out.store, path(("a", 3)))
    a4 = resolve(out.store, path(("a", 4)))
    assert format_clause(a3.defs[0].clause) == "fib(3) = 2;" and a3.defs[0].memo
    assert format_clause(a4.defs[0].clause) == "fib(4) = 3;" and a4.defs[0].memo
    assert resolve(out.store, path(("a", 5))) is None
    # the blind /fib definition is not memoized
    assert clauses_at(out.store, path(("fib", None))) == ["fib(n) = /a[n].fib(n);"]


def test_direct_object_call_leaves_store_alone(fib_oop):
    value, store = eval_located_call(fib_oop.store, path(("a", 2)), Call("fib", (Const(2),)))
    assert value == 1 and store == fib_oop.store


def test_unknown_location(fib_oop):
    with pytest.raises(UnknownLocation, match=r"/z\[1\]"):
        eval_located_call(fib_oop.store, path(("z", 1)), Call("f", (Const(0),)))


def test_method_missing_in_object(fib_oop):
    with pytest.raises(NoMatchingClause, match=r"/a\[1\]"):
        run(fib_oop, "/a[1].fib(2)")


def test_unqualified_calls_stay_inside_the_object():
    sp = parse_program(
        """
        def helper(0) = 100;
        at /o: def helper(0) = 1;
        at /o: def main(0) = helper(0) + 10;
        """
    )
    assert run(sp, "/o.main(0)").value == 11
    assert run(sp, "helper(0)").value == 100
    bare = parse_program("def helper(0) = 100; at /p: def main(0) = helper(0);")
    with pytest.raises(NoMatchingClause):
        run(bare, "/p.main(0)")


def test_source_store_is_not_mutated(fib_oop):
    before = fib_oop.store.clone()
    run(fib_oop, "/fib.fib(10)")
    assert fib_oop.store == before


# -------------------------------------------------------------- invariants


@pytest.mark.parametrize("n", range(1, 31))
def test_flat_and_located_fib_agree(fib_puq, fib_oop, n):
    # the located program starts at fib(1) = fib(2) = 1, i.e. flat fib(n - 1)
    located = run(fib_oop, f"/fib.fib({n})").value
    flat = evaluate(fib_puq.program, parse_expr(f"fib({n - 1})")).value if n >= 1 else None
    assert located == flat == fib_iter(n - 1)


@pytest.mark.parametrize("n", [3, 4, 10, 25])
def test_lazy_instantiation_and_lookup_cost(fib_oop, n):
    out = run(fib_oop, f"/fib.fib({n})")
    new = set(out.store.paths()) - set(fib_oop.store.paths())
    assert new == {path(("a", k)) for k in range(3, n + 1)}
    classes = len(fib_oop.store.class_entries)
    assert out.stats.instantiations == n - 2
    assert out.stats.class_scans <= classes * out.stats.instantiations
    # one resolution per located call: /fib, then two per instantiated body
    assert out.stats.resolutions == 1 + 1 + 2 * (n - 2)


def test_store_growth_is_monotone(fib_oop):
    ev = Evaluator(fib_oop.program, fib_oop.store)
    sizes = []
    for n in (3, 6, 4, 9):
        ev.eval(parse_expr(f"/fib.fib({n})"))
        sizes.append(sum(len(node.defs) for node in ev.store.nodes()))
    assert sizes == sorted(sizes)


def test_objects_without_a_class():
    sp = parse_program(
        """
        at /p[0]: def v() = 5;
        at /p[1]: def v() = /p[0].v() * 2;
        at /q: def w(0) = /p[1].v() + 1;
        """
    )
    out = run(sp, "/q.w(0)")
    assert out.value == 11 and out.store == sp.store


def test_nested_class(nested):
    out = run(nested, "/a/b[3].g(3)")
    assert out.value == 8
    new = set(out.store.paths()) - set(nested.store.paths())
    assert new == {path(("a", None), ("b", 2)), path(("a", None), ("b", 3))}


def test_dotted_nested_call_syntax(nested):
    assert parse_expr("/a./b[3].g(3)") == parse_expr("/a/b[3].g(3)")


def test_located_calls_from_flat_bodies(fib_oop):
    sp = parse_program(
        (
            "forall n. def twice(n) = /fib.fib(n) * 2;\n"
            + fib_oop.to_source()
        )
    )
    out = run(sp, "twice(6)")
    assert out.value == 16 and out.evolved == sp.program


def test_dump_store_format(fib_oop):
    out = run(fib_oop, "/fib.fib(4)")
    text = dump_store(out.store)
    assert text.splitlines()[:8] == [
        "at /a[1]:",
        "  fib(1) = 1;",
        "at /a[2]:",
        "  fib(2) = 1;",
        "at /a[3]:",
        "  fib(3) = 2;",
        "  fib(3) = /a[2].fib(2) + /a[1].fib(1);",
        "at /a[4]:",
    ]


def test_dump_orders_indices_numerically():
    sp = parse_program("at /a[10]: def f() = 1; at /a[9]: def f() = 2; at /a: def f() = 3; at /A: def f() = 4;")
    headers = [line for line in dump_store(sp.store).splitlines() if line.startswith("at ")]
    assert headers == ["at /A:", "at /a:", "at /a[9]:", "at /a[10]:"]


def test_located_call_budget(fib_oop):
    from puq import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        evaluate(fib_oop.program, parse_expr("/fib.fib(200)"), store=fib_oop.store, budget=Budget(max_steps=100))


def test_located_call_ast():
    e = parse_expr("/a[x+1].fib(x+1)".replace("x+1", "2"))
    assert e == LocatedCall((Segment("a", Const(2)),), "fib", (Const(2),))
    assert format_expr(e) == "/a[2].fib(2)"
    assert Clause("f").arity == 0
