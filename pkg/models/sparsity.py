"""
(3,6)-sparsity of finite graphs.

Two independent oracles return the same verdict: an exhaustive pass over
vertex subsets for small graphs and a min-cut search that scales.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from SurfaceScope.config import EXHAUSTIVE_BOUND
from SurfaceScope.utils.errors import BudgetExceededError
from SurfaceScope.utils.logger import get_logger
from SurfaceScope.utils.matrix import lowest_bit, popcount
from SurfaceScope.utils.workers import parallel_map

logger = get_logger(__name__)

TIGHT = "tight"
SPARSE = "sparse-not-tight"
VIOLATING = "violating"


@dataclass(frozen=True)
class SparsityVerdict:
    status: str
    deficiency: int
    witness: tuple = field(default=())
    f: int = 0

    @property
    def ok(self):
        return self.status != VIOLATING

    def as_dict(self):
        return {
            "status": self.status,
            "deficiency": self.deficiency,
            "witness": list(self.witness),
            "f": self.f,
        }


def as_graph(graph):
    """Abstract graph of a mesh, or the graph itself."""
    if hasattr(graph, "rotation"):
        return graph.graph()
    return graph


def maxwell_count(graph):
    graph = as_graph(graph)
    return 3 * graph.number_of_nodes() - graph.number_of_edges()


def _verdict(deficiency, witness, f):
    if deficiency > 0:
        status = VIOLATING
    elif deficiency == 0 and f == 6:
        status = TIGHT
    else:
        status = SPARSE
    return SparsityVerdict(status, int(deficiency), tuple(sorted(witness)), int(f))


def _least_mask(candidates):
    """Candidate whose sorted vertex tuple is lexicographically least."""
    low = 0
    while True:
        remaining = candidates >> low
        finished = candidates[remaining == 0]
        if finished.size:
            return int(finished[0])
        following = lowest_bit(remaining) + low
        first = following.min()
        candidates = candidates[following == first]
        low = int(first) + 1


def check_36_exhaustive(graph, bound=EXHAUSTIVE_BOUND):
    """Verdict from the induced subgraphs on all vertex sets of size >= 3."""
    graph = as_graph(graph)
    vertices = sorted(graph.nodes)
    size = len(vertices)
    if size > bound:
        raise BudgetExceededError(
            f"{size} vertices exceed the exhaustive bound {bound}; use the flow oracle"
        )
    if size < 3:
        raise ValueError("graph needs at least 3 vertices")
    index = {vertex: position for position, vertex in enumerate(vertices)}
    adjacency = np.zeros(size, dtype=np.int64)
    for u, v in graph.edges:
        adjacency[index[u]] |= 1 << index[v]
        adjacency[index[v]] |= 1 << index[u]

    # edges[mask] for every subset, one new top vertex at a time
    edges = np.zeros(1 << size, dtype=np.int64)
    for position in range(size):
        low = 1 << position
        masks = np.arange(low, dtype=np.int64)
        edges[low : 2 * low] = edges[:low] + popcount(adjacency[position] & masks, size)
    all_masks = np.arange(1 << size, dtype=np.int64)
    sizes = popcount(all_masks, size)
    values = edges - 3 * sizes + 6
    values[sizes < 3] = np.iinfo(np.int64).min
    deficiency = int(values.max())
    best = _least_mask(all_masks[values == deficiency])
    witness = [vertex for position, vertex in enumerate(vertices) if best >> position & 1]
    logger.debug("exhaustive oracle: %d vertices, deficiency %d", size, deficiency)
    return _verdict(deficiency, witness, maxwell_count(graph))


class _ClosureNetwork:
    """Source -> edge nodes (1), edge -> endpoints (unbounded), vertex -> sink (3).

    The min cut gives max over W of |E(G[W])| - 3|W|, with anchored vertices
    charged nothing.
    """

    def __init__(self, graph):
        self.vertices = sorted(graph.nodes)
        self.edges = list(graph.edges)
        self.n_edges = len(self.edges)
        first_vertex = 2 + self.n_edges
        self.node_of = {v: first_vertex + i for i, v in enumerate(self.vertices)}
        self.n_nodes = first_vertex + len(self.vertices)
        unbounded = 3 * len(self.vertices) + self.n_edges + 1
        rows, cols, caps = [], [], []
        for position, (u, v) in enumerate(self.edges):
            node = 2 + position
            rows += [0, node, node]
            cols += [node, self.node_of[u], self.node_of[v]]
            caps += [1, unbounded, unbounded]
        for v in self.vertices:
            rows.append(self.node_of[v])
            cols.append(1)
            caps.append(3)
        self.capacity = csr_matrix(
            (np.array(caps, dtype=np.int32), (np.array(rows), np.array(cols))),
            shape=(self.n_nodes, self.n_nodes),
        )
        self.capacity.sort_indices()
        self._sink_slot = {}
        for v in self.vertices:
            node = self.node_of[v]
            start, end = self.capacity.indptr[node], self.capacity.indptr[node + 1]
            slot = start + int(np.flatnonzero(self.capacity.indices[start:end] == 1)[0])
            self._sink_slot[v] = slot

    def solve(self, anchors=()):
        """Closure value and the vertices on the source side."""
        capacity = self.capacity.copy()
        for v in anchors:
            capacity.data[self._sink_slot[v]] = 0
        capacity.eliminate_zeros()
        result = maximum_flow(capacity, 0, 1, method="dinic")
        residual = capacity - result.flow
        residual.data[residual.data < 0] = 0
        residual.eliminate_zeros()
        reached = breadth_first_order(residual, 0, directed=True, return_predecessors=False)
        reached = set(int(node) for node in reached)
        side = {v for v in self.vertices if self.node_of[v] in reached}
        return self.n_edges - int(result.flow_value), side | set(anchors)


def _two_paths(graph):
    """Anchor triples a-b-c with edges ab and bc, one per vertex set."""
    triples = set()
    for b in graph.nodes:
        for a, c in combinations(sorted(graph.neighbors(b)), 2):
            triples.add(tuple(sorted((a, b, c))))
    return sorted(triples)


def check_36_flow(graph, workers=None):
    """Verdict from min cuts; agrees with :func:`check_36_exhaustive`."""
    graph = as_graph(graph)
    f = maxwell_count(graph)
    if graph.number_of_nodes() < 3:
        raise ValueError("graph needs at least 3 vertices")
    network = _ClosureNetwork(graph)
    value, side = network.solve()
    if value > 0:
        logger.debug("flow oracle: dense subgraph found without anchors")
        return _verdict(value + 6, side, f)
    anchors = _two_paths(graph)
    if not anchors:
        # a matching: any three vertices spanning one edge, or none
        vertices = sorted(graph.nodes)
        if graph.number_of_edges() == 0:
            return _verdict(-3, vertices[:3], f)
        u, v = min(tuple(sorted(edge)) for edge in graph.edges)
        third = next(x for x in vertices if x not in (u, v))
        return _verdict(-2, (u, v, third), f)
    results = parallel_map(network.solve, anchors, workers)
    best_value, best_side = None, None
    for value, side in results:
        if best_value is None or value > best_value or (
            value == best_value and sorted(side) < sorted(best_side)
        ):
            best_value, best_side = value, side
    logger.debug("flow oracle: %d anchors, deficiency %d", len(anchors), best_value - 3)
    return _verdict(best_value - 3, best_side, f)


def check_36(graph, workers=None):
    """Exhaustive verdict when the graph is small enough, flow verdict otherwise."""
    graph = as_graph(graph)
    if graph.number_of_nodes() <= EXHAUSTIVE_BOUND:
        return check_36_exhaustive(graph)
    return check_36_flow(graph, workers)


def is_tight(graph):
    return check_36(graph).status == TIGHT


def random_graph(n, p, rng):
    """Erdos-Renyi graph on ``range(n)`` driven by a ``random.Random``."""
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(
        (u, v) for u, v in combinations(range(n), 2) if rng.random() < p
    )
    return graph
