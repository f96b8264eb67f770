import mpmath as mp
import pytest

from plectic.config import set_precision


@pytest.fixture(autouse=True, scope="session")
def configured_precision():
    set_precision(128)
    yield


@pytest.fixture()
def square_lattice():
    return (mp.mpf(1), mp.mpc(0, 1))


@pytest.fixture()
def generic_tau():
    return mp.mpc("0.3", "1.7")
