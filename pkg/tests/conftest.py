import numpy as np
import pytest

from duffing_aa import Params


@pytest.fixture
def p0():
    return Params(mu=0.0)


@pytest.fixture
def p_damped():
    return Params(mu=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
