import numpy as np
import pytest

from fdiasim.kinematics import builtin_model

Q0_DEG = np.array([0.0, -10.0, 10.0, 0.0, 0.0, 0.0])


@pytest.fixture(scope="session")
def lrmate():
    return builtin_model("lrmate")


@pytest.fixture(scope="session")
def planar2():
    return builtin_model("planar2")


@pytest.fixture(scope="session")
def q0_rad():
    return np.radians(Q0_DEG)
