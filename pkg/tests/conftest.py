import numpy as np
import pytest

from gprotor.field import ProblemParams, make_grid


@pytest.fixture
def grid2():
    return make_grid(2, 64, 8.0)


@pytest.fixture
def grid3():
    return make_grid(3, 32, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def resonant():
    return ProblemParams((1.0, 2.0), (0.0, 0.0, 1.5), a=1.0)
