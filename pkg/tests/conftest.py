import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_plane(rng):
    from flatpoly.geometry import Plane

    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    return Plane(normal=n, point=rng.normal(size=3))
