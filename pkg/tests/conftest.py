import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo or sweep test")
    config.addinivalue_line("markers", "acceptance: acceptance criterion")


ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    """Store the one-line verdict of an acceptance criterion for the terminal summary."""
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
