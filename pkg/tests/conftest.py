import numpy as np
import pytest

from advs import GroverInstance, build_schedule


@pytest.fixture(scope="session")
def inst4():
    return GroverInstance.balanced(2)  # N = 4


@pytest.fixture(scope="session")
def inst16():
    return GroverInstance.balanced(4)  # N = 16


@pytest.fixture(scope="session")
def inst64():
    return GroverInstance.balanced(6)


@pytest.fixture(scope="session")
def inst1024():
    return GroverInstance.balanced(10)


@pytest.fixture(scope="session")
def uniform4_T10(inst4):
    return build_schedule("uniform", inst4, T=10.0)


def richardson_trapezoid(func, a, b, levels=(2 ** 14, 2 ** 15, 2 ** 16)):
    """Romberg-style oracle: trapezoid at increasing resolution plus one
    Richardson step; independent of every production quadrature path."""
    vals = []
    for m in levels:
        x = np.linspace(a, b, m + 1)
        y = func(x)
        vals.append(np.trapezoid(y, x))
    return (4.0 * vals[-1] - vals[-2]) / 3.0
