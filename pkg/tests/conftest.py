import numpy as np
import pytest

from lsicert.model import build_gaussian, build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def weak_gaussian():
    """Unit diagonal, coupling 0.25: delta = 0.5 under the norm condition."""
    return build_gaussian([[1.0, 0.25], [0.25, 1.0]])


@pytest.fixture
def two_point_model():
    """V = 0.5 x1 x2 on {-1, 1}^2."""
    return build_grid([[-1.0, 1.0], [-1.0, 1.0]], lambda x: 0.5 * x[0] * x[1])


@pytest.fixture
def five_point_model():
    """A certifiable grid model: 0.1 x1 x2 + |x|^2 / 2 on five points per axis."""
    pts = np.linspace(-2.0, 2.0, 5)
    return build_grid([pts, pts], lambda x: 0.1 * x[0] * x[1] + 0.5 * (x[0] ** 2 + x[1] ** 2))
