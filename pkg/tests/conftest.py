import pathlib
import sys

import pytest

from puq import parse_program

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


def load(name):
    return parse_program((PROGRAMS / name).read_text())


@pytest.fixture
def fib_puq():
    return load("fib.puq")


@pytest.fixture
def fib_bq():
    return load("fib_bq.puq")


@pytest.fixture
def fib_oop():
    return load("fib_oop.puq")


@pytest.fixture
def nested():
    return load("nested.puq")


# acceptance lines are collected here by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
