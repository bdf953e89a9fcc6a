import pathlib

import pytest

from mexec.lang import parse
from mexec.transforms import prepare

BENCH = pathlib.Path(__file__).resolve().parent.parent / "benchmarks"

# one line per end-to-end acceptance check, shown after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def load(name):
    """Parse and normalize a benchmark program."""
    source = (BENCH / name).read_text(encoding="utf-8")
    return prepare(parse(source))


@pytest.fixture
def foo():
    return load("foo.mx")


@pytest.fixture
def foo_infeasible():
    return load("foo_infeasible.mx")


@pytest.fixture
def k_cos():
    return load("k_cos.mx")
