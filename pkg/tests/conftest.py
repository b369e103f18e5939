import numpy as np
import pytest

from dispkin.grid import build_cartesian


@pytest.fixture(scope="session")
def grid128():
    return build_cartesian(128, 20.0)


@pytest.fixture(scope="session")
def grid64():
    return build_cartesian(64, 20.0)


def gaussian(grid, n=1.0, u=(0.0, 0.0), T=1.0):
    V1, V2 = grid.mesh
    return n / (2 * np.pi * T) * np.exp(-((V1 - u[0]) ** 2 + (V2 - u[1]) ** 2) / (2 * T))
