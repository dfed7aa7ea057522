import math

import pytest

from udwitness.field import CavityConfig
from udwitness.response import CouplingSpec


@pytest.fixture(scope="session")
def fig_cavity():
    """Large-cavity parameter set used by the velocity/acceleration figures."""
    return CavityConfig(L=10000.0, m=1.0, k0=5000)


@pytest.fixture(scope="session")
def fig_coupling():
    return CouplingSpec(2.0 * math.sqrt(5000.0))


@pytest.fixture(scope="session")
def small_cavity():
    """Desk-scale cavity for oracle runs."""
    return CavityConfig(L=4.0, m=1.0, k0=2)
