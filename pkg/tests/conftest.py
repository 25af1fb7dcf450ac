import math

import numpy as np
import pytest

from lfball.bcd import bcd_to_ball, counterexample_map
from lfball.lfm import LinearFractionalMap, validate


def disk_automorphism(r=0.5, m=1):
    """``(z1 + r)/(r z1 + 1)`` on the first coordinate, extended to ``C^m``."""
    T = np.eye(m + 1, dtype=complex)
    T[0, m] = T[m, 0] = r
    for k in range(1, m):
        T[k, k] = math.sqrt(1.0 - r * r)
    return validate(LinearFractionalMap(T, label=f"disk automorphism r={r}"))


def parabolic_map():
    """``(1 + z)/(3 - z)``, the Cayley conjugate of ``w -> w + 1``."""
    return validate(LinearFractionalMap(np.array([[1.0, 1.0], [-1.0, 3.0]])))


def rotation_map(m=1):
    return validate(LinearFractionalMap(np.diag([1j] * m + [1.0])))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def auto1():
    return disk_automorphism(0.5, 1)


@pytest.fixture
def auto2():
    return disk_automorphism(0.5, 2)


@pytest.fixture
def parabolic():
    return parabolic_map()


@pytest.fixture
def rotation():
    return rotation_map(1)


@pytest.fixture
def counterexample_ball():
    return bcd_to_ball(counterexample_map(0.25, 2))
