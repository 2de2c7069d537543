import numpy as np
import pytest

from chordal_ph import build_loop
from helpers import regular_polygon

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def pentagon():
    return build_loop(regular_polygon(5))


@pytest.fixture
def record():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
