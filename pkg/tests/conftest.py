import numpy as np
import pytest

from glvsync import SystemParams

# reference chaotic parameter set and the standard initial condition
P_REF = (2.9851, 3.0, 2.0)
P_ALT = (2.0451, 2.129, 2.0)
X0_REF = np.array([1.0023, 1.0589, 0.6503])


@pytest.fixture(scope="session")
def params():
    return SystemParams(*P_REF)


@pytest.fixture(scope="session")
def alt_params():
    return SystemParams(*P_ALT)


@pytest.fixture(scope="session")
def x0():
    return X0_REF.copy()


@pytest.fixture()
def rng():
    return np.random.RandomState(20240117)
