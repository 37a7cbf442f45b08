"""
Generic infinitesimal rigidity in dimension 3.

Ranks are exact: rigidity matrices are filled with random placements over a
prime field and reduced with modular elimination, the best of a few trials
taken as the generic rank.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from SurfaceScope.config import DEFAULT_SEED, FAST_PRIME, RANK_TRIALS, RIGIDITY_PRIME
from SurfaceScope.models.model_surface import is_nested
from SurfaceScope.models.sparsity import as_graph
from SurfaceScope.utils.logger import get_logger
from SurfaceScope.utils.matrix import modular_rank
from SurfaceScope.utils.workers import parallel_map

logger = get_logger(__name__)

DIMENSION = 3
LARGE_STAGE = 60  # vertices above which tower stages use the fast prime


def full_rank(vertex_count):
    return DIMENSION * vertex_count - 6


@dataclass(frozen=True)
class RankReport:
    vertices: int
    edges: int
    rank: int
    trials: int
    seed: int
    prime: int

    @property
    def dof(self):
        return full_rank(self.vertices) - self.rank

    @property
    def is_3rigid(self):
        return self.rank == full_rank(self.vertices)

    @property
    def is_min_3rigid(self):
        return self.is_3rigid and self.edges == self.rank

    def as_dict(self):
        return {
            "V": self.vertices,
            "E": self.edges,
            "rank": self.rank,
            "dof": self.dof,
            "is_3rigid": self.is_3rigid,
            "is_min_3rigid": self.is_min_3rigid,
            "trials": self.trials,
            "seed": self.seed,
            "prime": self.prime,
        }


def rigidity_matrix(graph, placement, prime=None):
    """Edge-by-coordinate matrix of the flex condition.

    ``placement`` maps each vertex to three integers; entries are reduced
    modulo ``prime`` when one is given.
    """
    graph = as_graph(graph)
    vertices = sorted(graph.nodes)
    column = {vertex: DIMENSION * index for index, vertex in enumerate(vertices)}
    edges = sorted(tuple(sorted(edge)) for edge in graph.edges)
    matrix = np.zeros((len(edges), DIMENSION * len(vertices)), dtype=object)
    for row, (v, w) in enumerate(edges):
        difference = [int(a) - int(b) for a, b in zip(placement[v], placement[w])]
        reduced = difference if prime is None else [x % prime for x in difference]
        if not any(reduced):
            raise ValueError(f"edge {v}-{w} has coincident endpoints")
        for axis, value in enumerate(difference):
            matrix[row, column[v] + axis] = value
            matrix[row, column[w] + axis] = -value
    if prime is not None:
        matrix = matrix % prime
    return matrix


def _placement(vertices, rng, prime):
    coordinates = rng.integers(0, prime, size=(len(vertices), DIMENSION), dtype=np.int64)
    return {vertex: [int(x) for x in row] for vertex, row in zip(vertices, coordinates)}


def generic_rank(graph, seed=DEFAULT_SEED, prime=RIGIDITY_PRIME, trials=RANK_TRIALS, workers=None):
    """Best rank over ``trials`` random placements; deterministic given the seed."""
    graph = as_graph(graph)
    vertices = sorted(graph.nodes)
    if len(vertices) < 3:
        raise ValueError("generic rank needs at least 3 vertices")
    bound = min(graph.number_of_edges(), full_rank(len(vertices)))
    rng = np.random.default_rng(seed)
    placements = [_placement(vertices, rng, prime) for _ in range(trials)]

    def rank_of(placement):
        try:
            return modular_rank(rigidity_matrix(graph, placement, prime), prime, stop_at=bound)
        except ValueError:
            return 0

    best, used = 0, 0
    if workers and workers > 1:
        ranks = parallel_map(rank_of, placements, workers)
        best, used = max(ranks), len(ranks)
    else:
        for placement in placements:
            best = max(best, rank_of(placement))
            used += 1
            if best == bound:
                break
    logger.debug("generic rank %d of bound %d after %d trials", best, bound, used)
    return RankReport(len(vertices), graph.number_of_edges(), best, used, seed, prime)


def is_min_3rigid(graph, seed=DEFAULT_SEED, prime=RIGIDITY_PRIME):
    """``(minimal, report, redundant_edge)``; the edge is set for rigid graphs with spare edges."""
    graph = as_graph(graph)
    report = generic_rank(graph, seed, prime)
    if not report.is_3rigid or report.edges == report.rank:
        return report.is_min_3rigid, report, None
    for edge in sorted(tuple(sorted(edge)) for edge in graph.edges):
        reduced = graph.copy()
        reduced.remove_edge(*edge)
        if generic_rank(reduced, seed, prime).rank == report.rank:
            return False, report, edge
    return False, report, None


def exact_rational_rank(graph, seed=DEFAULT_SEED, spread=1000):
    """Rank over the rationals at a random integer placement."""
    graph = as_graph(graph)
    vertices = sorted(graph.nodes)
    rng = np.random.default_rng(seed)
    coordinates = rng.integers(-spread, spread + 1, size=(len(vertices), DIMENSION))
    placement = {v: [int(x) for x in row] for v, row in zip(vertices, coordinates)}
    rows = [[Fraction(int(x)) for x in row] for row in rigidity_matrix(graph, placement)]
    rank = 0
    columns = DIMENSION * len(vertices)
    for col in range(columns):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][col] != 0:
                factor = rows[i][col] / rows[rank][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class TowerCertificate:
    reports: tuple
    nested: bool

    @property
    def ok(self):
        return self.nested and all(report.is_min_3rigid for report in self.reports)

    def as_dict(self):
        return {
            "ok": self.ok,
            "nested": self.nested,
            "stages": [report.as_dict() for report in self.reports],
        }


def tower_certificate(stages, seed=DEFAULT_SEED, prime=None):
    """Check every stage is minimally 3-rigid and each stage contains the last.

    This certifies the sequential criterion for the union and nothing more.
    """
    reports = []
    for stage in stages:
        chosen = prime
        if chosen is None:
            chosen = RIGIDITY_PRIME if len(stage.vertices) <= LARGE_STAGE else FAST_PRIME
        reports.append(generic_rank(stage, seed, chosen))
    nested = all(is_nested(a, b) for a, b in zip(stages, stages[1:]))
    return TowerCertificate(tuple(reports), nested)
