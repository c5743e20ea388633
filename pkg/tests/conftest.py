import math

import pytest

from lyapqubit import BlochAngles, SystemParams, from_bloch


@pytest.fixture
def params01():
    return SystemParams(1.0, 0.1)


@pytest.fixture
def params005():
    return SystemParams(1.0, 0.05)


def bloch_state(gamma: float, phi: float):
    return from_bloch(BlochAngles(gamma, phi))


@pytest.fixture
def fig1_state():
    # 1/sqrt(2) (|e> + e^{-i pi/4} |g>), with the phase reduced to [0, 2*pi)
    return bloch_state(math.pi / 2, 7 * math.pi / 4)
