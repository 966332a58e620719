import numpy as np
import pytest

from horoopt.spd import random_spd, random_symmetric

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def spd_pair(rng):
    return random_spd(4, rng), random_spd(4, rng)


def tangent(n, rng, scale=1.0):
    return random_symmetric(n, rng, scale)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
