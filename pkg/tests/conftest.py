import numpy as np
import pytest

from antswarm.habitat import GrayImage, make_synthetic
from antswarm.swarm import SwarmParams, init_colony


def place(habitat, ants, params=None, energy=1.0):
    """Colony with ants at explicit ``(x, y, heading)`` positions."""
    colony = init_colony(habitat, params or SwarmParams(), count_override=0, energy=energy)
    for x, y, h in ants:
        colony.occupancy[y, x] = colony.population
        colony.append([x], [y], [h], energy)
    return colony


@pytest.fixture
def flat():
    return GrayImage(np.full((9, 9), 128, np.uint8))


@pytest.fixture(scope="session")
def cross():
    return make_synthetic("cross", 100, 100, arm=20)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
