import functools

import pytest

from stepnls.spectral import symmetric_shock
from stepnls.trace import trace_genus2

_REPORT = pytest.StashKey[list]()


@functools.lru_cache(maxsize=None)
def traced(ratio: float, h_init: float = 0.02):
    return trace_genus2(symmetric_shock(ratio), h_init=h_init)


@pytest.fixture(scope="session")
def trace_of():
    return traced


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_REPORT, [])

    def emit(number: int, name: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        lines.append(line)
        print(line)
        assert ok, line
    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines):
            terminalreporter.write_line(line)
