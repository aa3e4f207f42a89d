import numpy as np
import pytest

from star_kg import StarNetwork, functions


@pytest.fixture
def net3():
    """Three branches, distinct speeds and potentials."""
    return StarNetwork([1.0, 2.0, 0.5], [0.0, 1.0, 3.0])


@pytest.fixture
def line():
    """Two equal half-lines: a free line with the vertex at the origin."""
    return StarNetwork([1.0, 1.0], [0.0, 0.0])


@pytest.fixture
def bump3():
    """Smooth bump on all three branches, vanishing near the vertex."""
    return functions.gaussian(3, 5.0, 0.5, amplitude=np.array([1.0, -0.6, 0.3]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
