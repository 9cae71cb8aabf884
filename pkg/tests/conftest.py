import pytest

from secmec.experiments import gate_geometry
from secmec.params import SystemParams


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def gate(params):
    return gate_geometry(params)
