import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from smoothlab import build_dickman, build_lpf_sieve, build_prime_table  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def dickman():
    return build_dickman()


@pytest.fixture(scope="session")
def table():
    return build_prime_table(10**6)


@pytest.fixture(scope="session")
def sieve():
    return build_lpf_sieve(10**6)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
