import functools
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from barrier_comp import load_builtin  # noqa: E402
from barrier_comp.sim import simulate  # noqa: E402

ACCEPTANCE_LINES: dict = {}


def record_acceptance(number: int, passed: bool, detail: str):
    line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@functools.lru_cache(maxsize=None)
def full_run(name: str, init_index: int = 0, kappa: float | None = None):
    """Full-horizon closed-loop run of a bundled scenario, computed once per session."""
    sc = load_builtin(name)
    return simulate(sc, x0=sc.init[init_index], kappa=kappa)


@pytest.fixture(scope="session")
def runs():
    return full_run
