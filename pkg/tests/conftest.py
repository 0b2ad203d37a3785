import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cmdnls.dynamics import ground_state
from cmdnls.fields import make_grid
from cmdnls.solitons import residues_from_poles, sample_soliton

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def grid():
    """Reference working grid (small enough for matrix assembly in tests)."""
    return make_grid(256, 100.0)


@pytest.fixture(scope="session")
def grid512():
    return make_grid(512, 200.0)


@pytest.fixture(scope="session")
def R(grid):
    return ground_state(grid)


@pytest.fixture(scope="session")
def R512(grid512):
    return ground_state(grid512)


@pytest.fixture(scope="session")
def two_soliton(grid):
    z = np.array([-1j, -2j])
    return sample_soliton(grid, residues_from_poles(z), mode="lattice")


@pytest.fixture(scope="session")
def two_soliton512(grid512):
    z = np.array([-1j, -2j])
    return sample_soliton(grid512, residues_from_poles(z), mode="lattice")
