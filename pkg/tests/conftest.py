import numpy as np
import pytest

from dyadic_hilbert import GridFunction

ACCEPTANCE_RESULTS = []


def random_grid(rng, n):
    return GridFunction(rng.standard_normal((1 << n, 1 << n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{num:2d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}")
