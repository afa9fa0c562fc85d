import numpy as np
import pytest

from starris.channel import default_config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    # 3x3 surface keeps brute-force oracles fast
    return default_config(n_x=3, n_z=3, M=4)
