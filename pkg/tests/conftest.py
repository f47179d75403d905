import numpy as np
import pytest

from socptilt import instances as inst_builders


@pytest.fixture(scope="session")
def degenerate():
    return inst_builders.degenerate_quadratic()


@pytest.fixture(scope="session")
def identity_cone():
    return inst_builders.identity_cone()


@pytest.fixture(scope="session")
def negative_curvature():
    return inst_builders.negative_curvature()


@pytest.fixture(scope="session")
def inkernel_negative():
    return inst_builders.inkernel_negative()


@pytest.fixture(scope="session")
def trivial_stable():
    return inst_builders.trivial_stable()


@pytest.fixture(scope="session")
def squared_infeasible():
    return inst_builders.squared_infeasible()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
