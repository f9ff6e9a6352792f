"""Command-line interface: ``puq run|repl|trace|bench|dump``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

from .errors import BudgetExceeded, EvalError, ParseError, PuqError
from .evaluator import DEFAULT_MAX_DEPTH, Budget, Evaluator, format_record
from .locations import ClassEntry, ObjectStore, dump_store
from .parser import SourceProgram, parse_expr, parse_program
from .syntax import BQ, GROUND, PUQ, Program, format_const, pretty_print

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_EVAL = 3
EXIT_BUDGET = 4


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass
class CliConfig:
    command: str
    file: str | None = None
    expr: str | None = None
    max_steps: int | None = None
    max_depth: int = DEFAULT_MAX_DEPTH
    output: str = "human"
    show_evolved: bool = False
    force_mode: str | None = None
    only: tuple = ()

    def budget(self) -> Budget:
        steps = self.max_steps if self.max_steps is not None else Budget.default().max_steps
        return Budget(steps, self.max_depth)


# ------------------------------------------------------------------ helpers


def _requantify(d, mode, names):
    if d.quantifier == GROUND or (names and d.head not in names):
        return d
    return dataclasses.replace(d, quantifier=mode)


def force_mode(sp: SourceProgram, mode: str, names=()) -> SourceProgram:
    """Rewrite every ``forall``/``pforall`` definition (or only those named) to ``mode``."""
    names = set(names)
    program = Program(tuple(_requantify(d, mode, names) for d in sp.program.defs))
    store: ObjectStore = sp.store.clone()
    for node in store.nodes():
        node.defs = [_requantify(d, mode, names) for d in node.defs]
    store.class_entries = [
        ClassEntry(e.path, _requantify(e.definition, mode, names)) for e in store.class_entries
    ]
    return SourceProgram(program, store, sp.source_map)


def has_toggle(sp: SourceProgram) -> bool:
    defs = list(sp.program.defs) + [e.definition for e in sp.store.class_entries]
    for node in sp.store.nodes():
        defs.extend(node.defs)
    return any(d.quantifier != GROUND for d in defs)


def load(config: CliConfig) -> SourceProgram:
    if config.file is None:
        return SourceProgram()
    try:
        with open(config.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {config.file}: {exc.strerror}") from None
    sp = parse_program(text)
    if config.force_mode:
        sp = force_mode(sp, config.force_mode, config.only)
    return sp


def show_state(ev: Evaluator, out) -> None:
    out.write(pretty_print(ev.program))
    if not ev.store.is_empty():
        out.write(dump_store(ev.store))


def _require(config: CliConfig, *fields):
    for name in fields:
        if getattr(config, name) is None:
            raise UsageError(f"{config.command} needs --{name}" if name != "file" else f"{config.command} needs a FILE")


def _fail(exc: Exception, err) -> int:
    if isinstance(exc, UsageError):
        err.write(f"puq: {exc}\n")
        return EXIT_USAGE
    if isinstance(exc, ParseError):
        err.write(f"puq: {exc}\n")
        return EXIT_PARSE
    if isinstance(exc, BudgetExceeded):
        err.write(f"puq: {exc}\n")
        return EXIT_BUDGET
    if isinstance(exc, (EvalError, PuqError)):
        err.write(f"puq: {exc}\n")
        return EXIT_EVAL
    raise exc


def _stats_record(stats) -> str:
    return " ".join(f"{k}={v}" for k, v in stats.as_dict().items())


# ----------------------------------------------------------------- commands


def cmd_run(config: CliConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        _require(config, "file", "expr")
        sp = load(config)
        expr = parse_expr(config.expr)
        ev = Evaluator(sp.program, sp.store, config.budget())
        value = ev.eval(expr)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        return _fail(exc, err)
    if config.output == "machine":
        out.write(f"value={format_const(value)}\n")
        out.write(_stats_record(ev.counters) + "\n")
    else:
        out.write(format_const(value) + "\n")
    if config.show_evolved:
        show_state(ev, out)
    return EXIT_OK


def cmd_trace(config: CliConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    def sink(event):
        out.write(event.format() + "\n")

    try:
        _require(config, "file", "expr")
        sp = load(config)
        expr = parse_expr(config.expr)
        ev = Evaluator(sp.program, sp.store, config.budget(), trace=sink)
        value = ev.eval(expr)
    except Exception as exc:  # noqa: BLE001
        return _fail(exc, err)
    fields = {"value": format_const(value), **ev.counters.as_dict()}
    out.write(format_record("summary", fields) + "\n")
    return EXIT_OK


def cmd_bench(config: CliConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        _require(config, "file", "expr")
        base = load(dataclasses.replace(config, force_mode=None))
        expr = parse_expr(config.expr)
    except Exception as exc:  # noqa: BLE001
        return _fail(exc, err)
    if config.force_mode:
        modes = [config.force_mode]
    elif has_toggle(base):
        modes = [BQ, PUQ]
    else:
        modes = ["source"]
    status = EXIT_OK
    for mode in modes:
        sp = base if mode == "source" else force_mode(base, mode, config.only)
        ev = Evaluator(sp.program, sp.store, config.budget())
        t0 = time.perf_counter()
        try:
            value = format_const(ev.eval(expr))
            outcome = "ok"
        except EvalError as exc:
            value = "-"
            outcome = exc.kind
            status = max(status, EXIT_BUDGET if isinstance(exc, BudgetExceeded) else EXIT_EVAL)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        out.write(
            f"mode={mode} status={outcome} value={value} {_stats_record(ev.counters)} wall_ms={wall_ms:.3f}\n"
        )
    return status


def cmd_dump(config: CliConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        _require(config, "file")
        sp = load(config)
    except Exception as exc:  # noqa: BLE001
        return _fail(exc, err)
    out.write(pretty_print(sp.program))
    if not sp.store.is_empty():
        out.write(dump_store(sp.store))
    return EXIT_OK


REPL_HELP = """\
:program   show the evolved flat program
:store     show the object store
:reset     restore the program loaded at start
:quit      leave
"""


def cmd_repl(config: CliConfig, inp=None, out=None, err=None) -> int:
    inp, out, err = inp or sys.stdin, out or sys.stdout, err or sys.stderr
    try:
        sp = load(config)
    except Exception as exc:  # noqa: BLE001
        return _fail(exc, err)
    ev = Evaluator(sp.program, sp.store, config.budget())
    interactive = hasattr(inp, "isatty") and inp.isatty()
    while True:
        if interactive:
            out.write("puq> ")
            out.flush()
        line = inp.readline()
        if not line:
            break
        line = line.strip()
        if not line or line.startswith("--"):
            continue
        if line.startswith(":"):
            cmd = line[1:].strip()
            if cmd in ("quit", "q"):
                break
            if cmd == "program":
                out.write(pretty_print(ev.program))
            elif cmd == "store":
                out.write(dump_store(ev.store))
            elif cmd == "reset":
                ev = Evaluator(sp.program, sp.store, config.budget())
            elif cmd == "help":
                out.write(REPL_HELP)
            else:
                err.write(f"unknown command :{cmd} (try :help)\n")
            continue
        try:
            expr = parse_expr(line)
            # each input gets a fresh step allowance
            ev.counters.steps = 0
            value = ev.eval(expr)
        except PuqError as exc:
            err.write(f"{exc}\n")
            continue
        out.write(format_const(value) + "\n")
        out.flush()
    return EXIT_OK


COMMANDS = {"run": cmd_run, "trace": cmd_trace, "bench": cmd_bench, "dump": cmd_dump, "repl": cmd_repl}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="puq", description="Evaluate programs of evolving recursive definitions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(p, file_required=True):
        if file_required:
            p.add_argument("file", help="program source (.puq)")
        else:
            p.add_argument("file", nargs="?", help="program source to preload")
        p.add_argument("--max-steps", type=int, default=None, help="step budget (default $PUQ_MAX_STEPS or 10000000)")
        p.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, help="frame depth budget")
        p.add_argument("--force-mode", choices=[BQ, PUQ], default=None, help="rewrite quantifiers at load time")
        p.add_argument("--only", action="append", default=[], metavar="NAME", help="restrict --force-mode to these heads")

    p = sub.add_parser("run", help="evaluate an expression")
    common(p)
    p.add_argument("--expr", "-e", required=True)
    p.add_argument("--show-evolved", action="store_true", help="print the evolved program and store")
    p.add_argument("--output", choices=["human", "machine"], default="human")

    p = sub.add_parser("trace", help="evaluate while printing trace events")
    common(p)
    p.add_argument("--expr", "-e", required=True)

    p = sub.add_parser("bench", help="compare forall and pforall evaluation")
    common(p)
    p.add_argument("--expr", "-e", required=True)

    p = sub.add_parser("dump", help="print the parsed program without evaluating")
    common(p)

    p = sub.add_parser("repl", help="interactive session")
    common(p, file_required=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = CliConfig(
        command=args.command,
        file=args.file,
        expr=getattr(args, "expr", None),
        max_steps=args.max_steps,
        max_depth=args.max_depth,
        output=getattr(args, "output", "human"),
        show_evolved=getattr(args, "show_evolved", False),
        force_mode=args.force_mode,
        only=tuple(args.only),
    )
    return COMMANDS[config.command](config)


if __name__ == "__main__":
    sys.exit(main())
