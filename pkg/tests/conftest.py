import numpy as np
import pytest

from tfcauchy import bernstein as bfn
from tfcauchy.operator import (Domain1D, MODE_JUMP, build_operator, eigensystem)


@pytest.fixture(scope="session")
def unit_domain():
    # h = 1/200 so that x = 0.5 is a grid point
    return Domain1D(0.0, 1.0, 199)


@pytest.fixture(scope="session")
def classical_es(unit_domain):
    return eigensystem(build_operator(unit_domain, bfn.classical_laplacian(), 0.0))


@pytest.fixture(scope="session")
def sqrt_es(unit_domain):
    return eigensystem(build_operator(unit_domain, bfn.fractional(1.0), 0.0))


@pytest.fixture(scope="session")
def sym_domain():
    # (-1, 1) with 401 interior points; x = 0, +-0.5 are grid points
    return Domain1D(-1.0, 1.0, 401)


@pytest.fixture(scope="session")
def jump_operator(sym_domain):
    return build_operator(sym_domain, bfn.fractional(1.0), 0.0, MODE_JUMP)


@pytest.fixture(scope="session")
def jump_es(jump_operator):
    return eigensystem(jump_operator, 100)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
