import numpy as np
import pytest

from catcmc.base import CylinderField
from catcmc.geometry import neck_params


@pytest.fixture
def neck():
    return neck_params(0.1, gamma=0.5, n_x=16, n_s=201)


@pytest.fixture
def coarse_neck():
    return neck_params(0.1, gamma=0.5, n_x=8, n_s=33)


@pytest.fixture
def gaussian_mode():
    """exp(-s^2) cos(kx) on a given neck."""

    def build(params, k=2):
        return CylinderField.from_profile(params, np.exp(-(params.s**2)), k)

    return build


def convergence_order(errors):
    return min(np.log2(a / b) for a, b in zip(errors, errors[1:]))
