import numpy as np
import pytest

from xxzgaudin import bethe, desk_params, random_params


@pytest.fixture
def desk():
    return desk_params()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_roots():
    p = desk_params()
    return {k: bethe.solve_bethe(k, p, seed=0) for k in (1, 2)}


@pytest.fixture(scope="session")
def four_site():
    """A random N = 4 instance with its M = 2 solutions of both kinds."""
    p = random_params(np.random.default_rng(7), 4)
    return p, {k: bethe.solve_bethe(k, p, seed=0, starts=48) for k in (1, 2)}


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1.0)
