import numpy as np
import pytest

from mqwlink.laser import LaserParams, threshold_current


@pytest.fixture(scope="session")
def laser():
    return LaserParams()


@pytest.fixture(scope="session")
def i_th(laser):
    return threshold_current(laser)


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Print one PASS/FAIL line and keep it for the terminal summary."""
    def emit(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash.setdefault(ACCEPTANCE, []).append(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
