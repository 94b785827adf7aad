import numpy as np
import pytest

from randhull.body import Ball, Ellipsoid, sample_surface
from randhull.rng import Stream, derive_seed


@pytest.fixture(scope="session")
def sphere_points():
    def make(n, d, seed):
        return sample_surface(Ball(d), Stream(derive_seed(seed, d, n)), n)
    return make


@pytest.fixture(scope="session")
def gaussian_points():
    def make(n, d, seed):
        s = Stream(derive_seed(seed, 0xAB, d, n))
        return np.array([[s.gauss() for _ in range(d)] for _ in range(n)])
    return make
