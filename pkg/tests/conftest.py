import numpy as np
import pytest

from cubemix import corner_chain, solver
from cubemix.rng import RngStream, uniform_state


@pytest.fixture(scope="session")
def pdbs():
    """The three solver pattern databases (built once, then memory-mapped)."""
    return solver.load_or_build_pdbs()


@pytest.fixture(scope="session")
def corner_table():
    """Exact distance table over all 88,179,840 corner configurations."""
    return corner_chain.corner_bfs()


@pytest.fixture(scope="session")
def shallow_bfs():
    """Exact distances for the full cube out to depth 5."""
    return solver.bfs_enumerate(5)


@pytest.fixture()
def rng():
    return RngStream(12345)


@pytest.fixture()
def random_states():
    def make(count, seed=0):
        r = RngStream(seed, 99)
        return [uniform_state(r) for _ in range(count)]

    return make
