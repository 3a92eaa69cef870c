import numpy as np
import pytest

from ldfec.gf import field


@pytest.fixture(scope="session")
def gf256():
    return field(8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
