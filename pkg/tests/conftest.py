import numpy as np
import pytest

from elastosheet import FixedSoundSpeed, PlanarBackground, frozen_from_background

ACCEPTANCE_LINES = {}


@pytest.fixture
def b0():
    return PlanarBackground(1.0, 0.1, [1, 0, 0], [0, 1, 0], FixedSoundSpeed(1.0))


@pytest.fixture
def b0_pair(b0):
    return frozen_from_background(b0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
