import numpy as np
import pytest

from config import DEFAULT_SEED
from functions.linalg_core import random_gue


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def gue(rng):
    def sample(n):
        return random_gue(n, rng)
    return sample


@pytest.fixture
def flip():
    return np.array([[0, 1], [1, 0]], dtype=complex)
