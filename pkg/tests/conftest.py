from pathlib import Path

import numpy as np
import pytest

from qmarkov.generators import gen
from qmarkov.marginal_model import chain_geometry, hex_geometry
from qmarkov.models import InstanceSpec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def chain8():
    return chain_geometry(8, 2)


@pytest.fixture(scope="session")
def hex3():
    return hex_geometry(3, 2)


@pytest.fixture(scope="session")
def ghz_chain():
    """GHZ on 8 qubits, chain layout: (global state, marginals)."""
    return gen(InstanceSpec(kind="ghz", layout="chain", n=8, d=2))


@pytest.fixture(scope="session")
def classical_chain():
    return gen(InstanceSpec(kind="classical_chain", layout="chain", n=8, d=2, seed=7))


@pytest.fixture(scope="session")
def ghz_hex():
    return gen(InstanceSpec(kind="ghz", layout="hexgrid", n=3, d=2))
