import numpy as np
import pytest

from dnull.quantum.models import local_qudit_model, qubit_rotation_model, qutrit_real_model


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow presets")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo runs at large sample sizes")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def qubit():
    return qubit_rotation_model()


@pytest.fixture
def qutrit():
    return qutrit_real_model()


@pytest.fixture
def full_qubit():
    return local_qudit_model(2)


@pytest.fixture
def full_qutrit():
    return local_qudit_model(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_unit_vector(rng, dim):
    vector = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vector / np.linalg.norm(vector)


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
