import random

import networkx as nx
import pytest

from SurfaceScope.models.mesh import from_triangles
from SurfaceScope.models.seeds import disc, double_banana, octahedron

# K5 on 1..5 plus a vertex 0 of degree 2: f = 6 but the K5 is too dense.
# The triangles form a Moebius band bounded by 0-4-3-2-1-5.
K5_BAND_TRIANGLES = [(0, 4, 5), (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)]


@pytest.fixture(scope="session")
def k5_band():
    return from_triangles(K5_BAND_TRIANGLES)


@pytest.fixture
def disc_mesh():
    return disc()


@pytest.fixture
def octahedron_mesh():
    return octahedron()


@pytest.fixture
def banana():
    return double_banana()


@pytest.fixture
def k5():
    return nx.complete_graph(5)


@pytest.fixture
def rng():
    return random.Random(20231017)
