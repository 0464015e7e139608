import numpy as np
import pytest

from sinebody import bodies, quadrature


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def rule3():
    """Fast deterministic rule on S^2 for module tests."""
    return quadrature.build_rule(3, 24)


@pytest.fixture(scope="session")
def rule2():
    return quadrature.build_rule(2, 512)


@pytest.fixture(scope="session")
def ball3():
    return bodies.Ball(3, 1.0)


@pytest.fixture(scope="session")
def spheroid():
    return bodies.Ellipsoid([1.0, 1.0, 2.0])


@pytest.fixture(scope="session")
def bicylinder():
    e = np.eye(3)
    return bodies.CylinderSet([e[0], e[1]], [1.0, 1.0])


@pytest.fixture(scope="session")
def tricylinder():
    e = np.eye(3)
    return bodies.CylinderSet([e[0], e[1], e[2]], [1.0, 1.0, 1.0])


def random_unit(rng, n, m=1):
    x = rng.normal(size=(m, n))
    return x / np.linalg.norm(x, axis=1)[:, None]
