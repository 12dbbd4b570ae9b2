import numpy as np
import pytest

from gfscma.codebooks import build_factor_graph, default_codebooks
from gfscma.pilots import build_pilot_pool, pilot_matrix


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full acceptance-criteria gate")
    config.addinivalue_line("markers", "slow: Monte Carlo tests beyond a few seconds")


@pytest.fixture(scope="session")
def default_pool():
    return build_pilot_pool(J=6, L=3, rb_count=6)


@pytest.fixture(scope="session")
def default_graph():
    return build_factor_graph(T=4, J=6, N=2)


@pytest.fixture(scope="session")
def default_books(default_graph):
    _, books = default_codebooks(default_graph)
    return books


@pytest.fixture(scope="session")
def default_S(default_pool):
    return pilot_matrix(default_pool)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
