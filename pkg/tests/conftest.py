import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pshardcore.graph_core import EVEN, ball  # noqa: E402
from pshardcore.lattice_gallery import HostSpec, generate  # noqa: E402


def centre(window, parity=EVEN):
    dist = window.frame_distance
    return max((v for v in range(window.n) if window.parity[v] == parity), key=lambda v: (dist[v], -v))


@pytest.fixture(scope="session")
def grid():
    return generate(HostSpec("grid_zd", side=10))


@pytest.fixture(scope="session")
def grid12():
    return generate(HostSpec("grid_zd", side=12))


@pytest.fixture(scope="session")
def dice():
    return generate(HostSpec("dice", side=12))


@pytest.fixture(scope="session")
def grid_ball3(grid):
    window, basis, _ = grid
    return ball(window, centre(window), 3)
