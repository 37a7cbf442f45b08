import networkx as nx
import pytest

from SurfaceScope.models.seeds import discus, double_banana, octahedron
from SurfaceScope.models.sparsity import (
    SPARSE,
    TIGHT,
    VIOLATING,
    check_36,
    check_36_exhaustive,
    check_36_flow,
    is_tight,
    maxwell_count,
    random_graph,
)
from SurfaceScope.utils.errors import BudgetExceededError


def test_k5_violates(k5):
    for oracle in (check_36_exhaustive, check_36_flow):
        verdict = oracle(k5)
        assert verdict.status == VIOLATING
        assert verdict.deficiency == 1
        assert verdict.witness == (0, 1, 2, 3, 4)
        assert verdict.f == 5


def test_dense_subgraph_inside_an_f6_mesh(k5_band):
    assert maxwell_count(k5_band) == 6
    exhaustive = check_36_exhaustive(k5_band)
    flow = check_36_flow(k5_band)
    assert exhaustive.status == flow.status == VIOLATING
    assert exhaustive.deficiency == flow.deficiency == 1
    assert exhaustive.witness == flow.witness == (1, 2, 3, 4, 5)


@pytest.mark.parametrize("r", range(3, 11))
def test_discus_graphs_are_tight(r):
    graph = discus(r)
    assert check_36_exhaustive(graph).status == TIGHT
    assert check_36_flow(graph).status == TIGHT


def test_discus_three_is_k5_minus_an_edge():
    expected = nx.complete_graph(5)
    expected.remove_edge(3, 4)
    assert nx.is_isomorphic(discus(3), expected)


def test_octahedron_and_double_banana_are_tight(octahedron_mesh, banana):
    assert is_tight(octahedron_mesh)
    assert is_tight(banana)
    assert check_36_flow(octahedron()).deficiency == 0


def test_sparse_graph():
    verdict = check_36(nx.path_graph(5))
    assert verdict.status == SPARSE
    assert verdict.deficiency == -1
    assert verdict.ok


def test_matchings_and_empty_graphs():
    matching = nx.Graph([(0, 1), (2, 3)])
    assert check_36_flow(matching).deficiency == -2
    assert check_36_exhaustive(matching).deficiency == -2
    empty = nx.empty_graph(4)
    assert check_36_flow(empty).deficiency == -3
    assert check_36_exhaustive(empty).deficiency == -3


def test_big_dense_graph_uses_the_unanchored_cut():
    graph = nx.complete_graph(9)
    verdict = check_36_flow(graph)
    assert verdict.deficiency == 36 - 27 + 6
    assert verdict.witness == tuple(range(9))


def test_exhaustive_bound():
    with pytest.raises(BudgetExceededError):
        check_36_exhaustive(nx.cycle_graph(8), bound=7)
    with pytest.raises(ValueError):
        check_36_exhaustive(nx.path_graph(2))


def test_oracles_agree_on_random_graphs(rng):
    for _ in range(60):
        n = rng.randint(3, 11)
        graph = random_graph(n, rng.uniform(0.2, 0.9), rng)
        exhaustive = check_36_exhaustive(graph)
        flow = check_36_flow(graph)
        assert flow.status == exhaustive.status
        assert flow.deficiency == exhaustive.deficiency
        witness = graph.subgraph(flow.witness)
        assert witness.number_of_edges() - 3 * len(flow.witness) + 6 == flow.deficiency


def test_flow_oracle_with_workers(banana):
    assert check_36_flow(banana, workers=3) == check_36_flow(banana, workers=1)


def test_double_banana_counts():
    graph = double_banana()
    assert graph.number_of_nodes() == 8
    assert graph.number_of_edges() == 18
