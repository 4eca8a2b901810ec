import random

import pytest

from monoheight.linalg import IntMatrix


@pytest.fixture
def golden():
    return IntMatrix.from_rows([[2, 1], [1, 1]])


@pytest.fixture
def jordan2():
    return IntMatrix.from_rows([[2, 1], [0, 2]])


@pytest.fixture
def rng():
    return random.Random(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
