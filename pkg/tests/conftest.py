import random
from pathlib import Path

import pytest

from kgraph_kms.degrees import Degree
from kgraph_kms.sample_graphs import (
    commuting_2x2,
    one_vertex_loops,
    random_product_2graph,
    random_single_vertex_2graph,
    twisted_2x2,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def twisted():
    g = twisted_2x2()
    g.require_valid()
    return g


@pytest.fixture(scope="session")
def commuting():
    g = commuting_2x2()
    g.require_valid()
    return g


@pytest.fixture(scope="session")
def two_loops():
    g = one_vertex_loops(2)
    g.require_valid()
    return g


@pytest.fixture(scope="session")
def single_loop():
    g = one_vertex_loops(1)
    g.require_valid()
    return g


@pytest.fixture(scope="session")
def product_graph():
    g = random_product_2graph(random.Random(17), 2, 2)
    g.require_valid()
    return g


@pytest.fixture(scope="session")
def coaligned_pool():
    """The named example plus random 1-coaligned 2-graphs of both breeds."""
    rng = random.Random(23)
    pool = [twisted_2x2(), random_single_vertex_2graph(rng, 2, 2),
            random_single_vertex_2graph(rng, 3, 2), random_product_2graph(rng, 2, 2)]
    for g in pool:
        g.require_valid()
        ok, _ = g.is_one_coaligned()
        assert ok
    return pool


def D(*entries):
    return Degree(entries)


@pytest.fixture(scope="session")
def mk_degree():
    return D
