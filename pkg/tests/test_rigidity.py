import networkx as nx
import numpy as np
import pytest

from SurfaceScope.config import FAST_PRIME
from SurfaceScope.models.model_surface import build_tower, named_spec
from SurfaceScope.models.moves import collar, join, vertex_split, zero_extension
from SurfaceScope.models.rigidity import (
    exact_rational_rank,
    full_rank,
    generic_rank,
    is_min_3rigid,
    rigidity_matrix,
    tower_certificate,
)
from SurfaceScope.models.seeds import discus, piece, projective_seed, torus_seed
from SurfaceScope.models.sparsity import TIGHT, VIOLATING, check_36, check_36_exhaustive, check_36_flow
from SurfaceScope.utils.matrix import modular_rank


def test_single_edge_has_rank_one():
    graph = nx.Graph([(0, 1)])
    matrix = rigidity_matrix(graph, {0: [0, 0, 0], 1: [1, 2, 3]})
    assert matrix.shape == (1, 6)
    assert list(matrix[0]) == [-1, -2, -3, 1, 2, 3]
    assert modular_rank(matrix, FAST_PRIME) == 1


def test_coincident_endpoints_are_rejected():
    graph = nx.Graph([(0, 1)])
    with pytest.raises(ValueError):
        rigidity_matrix(graph, {0: [1, 1, 1], 1: [1, 1, 1]})


def test_triangle_is_minimally_rigid(disc_mesh):
    minimal, report, redundant = is_min_3rigid(disc_mesh)
    assert minimal
    assert report.rank == 3 == full_rank(3)
    assert redundant is None


def test_double_banana_is_flexible(banana):
    report = generic_rank(banana)
    assert report.rank == 17
    assert report.dof == 1
    assert not report.is_3rigid
    assert report.as_dict()["seed"] == 0


def test_k5_has_a_redundant_edge(k5):
    minimal, report, redundant = is_min_3rigid(k5)
    assert not minimal
    assert report.is_3rigid
    assert report.edges == 10
    assert redundant == (0, 1)


@pytest.mark.parametrize("r", range(3, 11))
def test_discus_graphs_are_minimally_rigid(r):
    minimal, report, _ = is_min_3rigid(discus(r))
    assert minimal
    assert report.rank == 3 * (r + 2) - 6


def test_octahedron_is_minimally_rigid(octahedron_mesh):
    assert generic_rank(octahedron_mesh).is_min_3rigid


def test_seeds_are_minimally_rigid():
    assert generic_rank(projective_seed()).is_min_3rigid
    assert generic_rank(torus_seed()).is_min_3rigid


def test_ranks_are_reproducible(banana):
    first = generic_rank(banana, seed=7)
    second = generic_rank(banana, seed=7, workers=2)
    assert first.rank == second.rank
    assert first.seed == 7


def test_fast_prime_agrees(octahedron_mesh):
    assert generic_rank(octahedron_mesh, prime=FAST_PRIME).rank == 12


def test_rational_rank_agrees_with_modular_rank(banana, k5):
    assert exact_rational_rank(banana) == 17
    assert exact_rational_rank(k5) == 9


def test_modular_rank_of_known_matrices():
    prime = 101
    identity = np.eye(4, dtype=np.int64)
    assert modular_rank(identity, prime) == 4
    singular = np.array([[1, 2], [2, 4]], dtype=np.int64)
    assert modular_rank(singular, prime) == 1
    # singular only modulo 7
    assert modular_rank(np.array([[1, 3], [2, 13]], dtype=np.int64), 7) == 1
    assert modular_rank(np.array([[1, 3], [2, 13]], dtype=object), 2**61 - 1) == 2


def test_tower_certificate():
    tower = build_tower(named_spec("mixed"), 2)
    certificate = tower_certificate(tower.stages)
    assert certificate.nested
    assert certificate.ok
    assert len(certificate.as_dict()["stages"]) == 3


def test_rigid_piece_substitution(rng):
    # swapping the piece glued onto a rigid base keeps minimal rigidity
    tower = build_tower(named_spec("plane"), 1)
    base = tower.stages[-1]
    ((hole, _),) = tower.frontier
    for _ in range(20):
        other = piece(rng.choice(["sphere", "projective", "torus"]), base.hole_length(hole))
        joined = join(base, hole, other, tuple(other.meta["piece"]["entrance"]))
        assert joined.maxwell_count == 6
        assert generic_rank(joined).is_min_3rigid


@pytest.mark.parametrize("name", ["plane", "loch-ness", "mixed", "cantor-tree"])
def test_deep_towers_are_tight_and_minimally_rigid(name):
    tower = build_tower(named_spec(name), 5)
    assert len(tower.stages) == 6
    for stage in tower.stages:
        assert stage.maxwell_count == 6
        assert check_36_flow(stage).status == TIGHT
        if len(stage.vertices) <= 18:
            assert check_36_exhaustive(stage).status == TIGHT
    certificate = tower_certificate(tower.stages)
    assert certificate.nested
    assert certificate.ok


def _one_hole(mesh):
    (hole,) = mesh.holes
    return hole


def _interior(mesh):
    on_holes = {vertex for hole in mesh.hole_faces for vertex in hole.vertices}
    return sorted(set(mesh.vertices) - on_holes)


def _tight_pair():
    base = build_tower(named_spec("plane"), 1).stages[-1]
    collared = collar(base, _one_hole(base))
    vertex = _interior(collared)[0]
    a, b = collared.neighbors(vertex)[:2]
    return base, vertex_split(collared, vertex, a, b)


def _dense_pair(k5_band):
    face = k5_band.triangle_faces[0]
    return k5_band, zero_extension(k5_band, face.face_id, face.vertices)


@pytest.mark.parametrize("pair", ["tight", "dense"])
def test_joins_depend_only_on_the_base_verdict(pair, k5_band, rng):
    first, second = _tight_pair() if pair == "tight" else _dense_pair(k5_band)
    assert first.hole_length(_one_hole(first)) == second.hole_length(_one_hole(second))
    assert check_36(first).status == check_36(second).status
    for _ in range(6):
        kind = rng.choice(["sphere", "projective", "torus"])
        statuses, rigid = set(), set()
        for base in (first, second):
            hole = _one_hole(base)
            other = piece(kind, base.hole_length(hole))
            joined = join(base, hole, other, tuple(other.meta["piece"]["entrance"]))
            statuses.add(check_36(joined).status)
            rigid.add(generic_rank(joined).is_min_3rigid)
        assert statuses == ({TIGHT} if pair == "tight" else {VIOLATING})
        assert rigid == {pair == "tight"}
