import numpy as np
import pytest

from opcs.basis import generate_origami, unswapped_origami
from opcs.imagery import shepp_logan


@pytest.fixture(scope="session")
def origami():
    cache = {}

    def get(side, swap_mode="post"):
        key = (side, swap_mode)
        if key not in cache:
            cache[key] = generate_origami(side, swap_mode)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def unswapped():
    cache = {}

    def get(side):
        if side not in cache:
            cache[side] = unswapped_origami(side)
        return cache[side]

    return get


@pytest.fixture(scope="session")
def phantom128():
    return shepp_logan(128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pm1(rng, side, count=None):
    shape = (side, side) if count is None else (count, side, side)
    return (2 * rng.integers(0, 2, size=shape) - 1).astype(np.int8)
