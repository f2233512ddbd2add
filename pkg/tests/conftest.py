import time

import pytest

from resonantcl.harness import plan_from_config, run_sweep
from resonantcl.scenarios import load_scenario

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def main_sweep():
    """The shipped sweep of the main resonant scenario, with its wall-clock time."""
    start = time.perf_counter()
    report = run_sweep(plan_from_config(load_scenario("checkerboard_resonant")))
    return report, time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
