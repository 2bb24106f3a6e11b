import numpy as np
import pytest

from spectral_clt import simulate


@pytest.fixture
def ma1_spec():
    return simulate.ma1()


@pytest.fixture
def two_state_half():
    """Two-state chain with eigenvalue 1 - 2p = 0.5."""
    return simulate.two_state(0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
