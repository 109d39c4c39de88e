from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from density_lab.seqcore import ArithmeticProgression, PrimesUpTo, block_sequence, build_sequence

settings.register_profile(
    "default",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def uniform():
    return build_sequence(ArithmeticProgression(1))


@pytest.fixture(scope="session")
def evens():
    return build_sequence(ArithmeticProgression(2))


@pytest.fixture(scope="session")
def triples():
    return build_sequence(ArithmeticProgression(3))


@pytest.fixture(scope="session")
def blocks():
    return block_sequence()


@pytest.fixture(scope="session")
def primes100():
    return build_sequence(PrimesUpTo(100))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
