import numpy as np
import pytest

from wickbridge.grid import Grid1D


@pytest.fixture
def grid():
    return Grid1D(-10.0, 10.0, 1001)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
