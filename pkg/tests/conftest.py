import numpy as np
import pytest

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
