"""
Superfaces of triangulated surfaces and the girth inequalities.

A superface is a face of a subgraph H whose vertices all have degree at least
two in H; it is a union of mesh faces. Holes count as nontriangular faces.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from SurfaceScope.config import ENUMERATION_BUDGET, REPAIR_MAX_MOVES
from SurfaceScope.models.mesh import opposite
from SurfaceScope.models.moves import MoveLog, join
from SurfaceScope.models.sparsity import TIGHT, check_36_flow
from SurfaceScope.utils.errors import (
    BudgetExceededError,
    ConsistencyError,
    MeshValidationError,
    MoveError,
)
from SurfaceScope.utils.logger import get_logger
from SurfaceScope.utils.matrix import popcount
from SurfaceScope.utils.workers import parallel_map

logger = get_logger(__name__)


@dataclass(frozen=True)
class BoundaryWalk:
    vertices: tuple
    edges: tuple
    face: int  # index of a mesh face on the walk's side

    @property
    def length(self):
        return len(self.edges)

    @property
    def is_cycle(self):
        return len(set(self.vertices)) == len(self.vertices)


@dataclass(frozen=True)
class SuperfaceReport:
    region: tuple
    walks: tuple
    boundary_edges: frozenset
    balanced: bool
    simple: bool
    euler: int
    orientable: bool
    reduced_genus: Fraction
    enclosed: tuple
    delta: int
    interior_vertices: frozenset = field(default=frozenset())
    interior_edges: frozenset = field(default=frozenset())

    @property
    def s(self):
        return len(self.walks)

    @property
    def lengths(self):
        return tuple(walk.length for walk in self.walks)

    def as_dict(self):
        return {
            "region": [list(face) for face in self.region],
            "walks": [list(walk.vertices) for walk in self.walks],
            "lengths": list(self.lengths),
            "s": self.s,
            "balanced": self.balanced,
            "simple": self.simple,
            "chi": self.euler,
            "orientable": self.orientable,
            "g_r": str(self.reduced_genus),
            "enclosed": [[list(face), length] for face, length in self.enclosed],
            "delta": self.delta,
        }


@dataclass(frozen=True)
class GirthVerdict:
    ok: bool
    worst: SuperfaceReport | None
    checked: int
    mode: str
    alternate_disagreements: int = 0

    def as_dict(self):
        return {
            "ok": self.ok,
            "mode": self.mode,
            "checked": self.checked,
            "alternate_delta_disagreements": self.alternate_disagreements,
            "witness": self.worst.as_dict() if self.worst else None,
        }


@dataclass(frozen=True)
class ComplementReport:
    count_holds: bool
    walk_form_holds: bool
    delta_holds: bool
    f_complement: int
    walk_quantity: int
    delta: int
    complement_genus: Fraction

    @property
    def agree(self):
        return self.count_holds == self.walk_form_holds == self.delta_holds

    def as_dict(self):
        return {
            "count": self.count_holds,
            "walk_form": self.walk_form_holds,
            "delta_form": self.delta_holds,
            "f_complement": self.f_complement,
            "walk_quantity": self.walk_quantity,
            "delta": self.delta,
            "complement_genus": str(self.complement_genus),
        }


class _FaceTable:
    """Per-mesh lookups shared by every subgraph visited."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.faces = list(mesh.faces)
        self.edge_ids = sorted(mesh.edges)
        self.lengths = [walk.length for walk in self.faces]
        self.is_hole = [walk.face_id in mesh.holes for walk in self.faces]
        self.corner_face = {}
        self.vertex_faces = defaultdict(set)
        self.sides = defaultdict(list)
        self.kappa = {}
        for index, walk in enumerate(self.faces):
            for corner in walk.corners:
                self.corner_face[corner] = index
                self.vertex_faces[mesh.dart_vertex(corner)].add(index)
            for dart, orientation in walk.states:
                edge = mesh.edges[dart[0]]
                self.sides[edge.id].append(index)
                forward = orientation if dart[1] == 0 else orientation * edge.sign
                self.kappa[(index, edge.id)] = forward

    def regions(self, edge_set):
        """Union-find roots of faces glued across edges outside ``edge_set``."""
        glued = nx.utils.UnionFind(range(len(self.faces)))
        for edge_id in self.edge_ids:
            if edge_id not in edge_set:
                glued.union(*self.sides[edge_id])
        return [glued[index] for index in range(len(self.faces))]

    def trace(self, edge_set):
        """Boundary walks of the faces of the subgraph on ``edge_set``."""
        mesh = self.mesh
        rotation = {}
        for edge_id in edge_set:
            edge = mesh.edges[edge_id]
            for vertex in (edge.u, edge.v):
                if vertex not in rotation:
                    rotation[vertex] = [d for d in mesh.rotation[vertex] if d[0] in edge_set]
        position = {d: (v, i) for v, darts in rotation.items() for i, d in enumerate(darts)}

        def rotate(dart, offset):
            vertex, index = position[dart]
            darts = rotation[vertex]
            return darts[(index + offset) % len(darts)]

        def step(state):
            dart, orientation = state
            orientation *= mesh.edges[dart[0]].sign
            arrival = opposite(dart)
            return (rotate(arrival, 1 if orientation > 0 else -1), orientation)

        def orbit(state):
            states = [state]
            current = step(state)
            while current != state:
                states.append(current)
                current = step(current)
            return states

        seen = set()
        walks = []
        for dart in sorted(position):
            for orientation in (1, -1):
                if (dart, orientation) in seen:
                    continue
                states = orbit((dart, orientation))
                seen.update(states)
                first = states[0]
                seen.update(orbit((opposite(first[0]), -first[1] * mesh.edges[first[0][0]].sign)))
                corner = rotate(first[0], -1) if first[1] > 0 else first[0]
                walks.append(
                    BoundaryWalk(
                        vertices=tuple(mesh.dart_vertex(d) for d, _ in states),
                        edges=tuple(d[0] for d, _ in states),
                        face=self.corner_face[corner],
                    )
                )
        return walks

    def face_ids(self, indices):
        return tuple(sorted(self.faces[index].face_id for index in indices))


def _components(table, faces, blocked):
    """Connected pieces of ``faces`` glued across edges outside ``blocked``."""
    graph = nx.Graph()
    graph.add_nodes_from(faces)
    for edge_id in table.edge_ids:
        if edge_id in blocked:
            continue
        a, b = table.sides[edge_id]
        if a in faces and b in faces:
            graph.add_edge(a, b)
    return list(nx.connected_components(graph))


def _orientable(table, faces, interior_edges):
    sign = {}
    for start in sorted(faces):
        if start in sign:
            continue
        sign[start] = 1
        stack = [start]
        while stack:
            face = stack.pop()
            for edge_id in table.faces[face].edge_ids:
                if edge_id not in interior_edges:
                    continue
                a, b = table.sides[edge_id]
                other = b if a == face else a
                wanted = sign[face] * table.kappa[(face, edge_id)] * table.kappa[(other, edge_id)]
                if other not in sign:
                    sign[other] = wanted
                    stack.append(other)
                elif sign[other] != wanted:
                    return False
    return True


def _interior(table, faces, boundary_edges):
    on_boundary = {
        vertex
        for edge_id in boundary_edges
        for vertex in (table.mesh.edges[edge_id].u, table.mesh.edges[edge_id].v)
    }
    vertices = frozenset(
        vertex
        for vertex in table.mesh.vertices
        if vertex not in on_boundary and table.vertex_faces[vertex] <= faces
    )
    edges = frozenset(
        edge_id
        for edge_id in table.edge_ids
        if edge_id not in boundary_edges and set(table.sides[edge_id]) <= faces
    )
    return vertices, edges


def _describe(table, faces, walks):
    faces = frozenset(faces)
    boundary_edges = frozenset(edge_id for walk in walks for edge_id in walk.edges)
    vertices, edges = _interior(table, faces, boundary_edges)
    s = len(walks)
    euler = len(vertices) - len(edges) + len(faces) + s
    reduced_genus = Fraction(2 - euler, 2)
    enclosed = tuple(
        (table.faces[index].face_id, table.lengths[index])
        for index in sorted(faces)
        if table.is_hole[index]
    )
    walk_total = sum(walk.length for walk in walks)
    delta = walk_total - sum(length - 3 for _, length in enclosed) - 3 * (
        len(vertices) - len(edges) + len(faces)
    )
    rest = frozenset(range(len(table.faces))) - faces
    balanced = bool(rest) and len(_components(table, rest, boundary_edges)) == 1
    walk_vertices = [set(walk.vertices) for walk in walks]
    simple = all(walk.is_cycle for walk in walks) and all(
        not walk_vertices[i] & walk_vertices[j]
        for i in range(s)
        for j in range(i + 1, s)
    )
    return SuperfaceReport(
        region=table.face_ids(faces),
        walks=tuple(sorted(walks, key=lambda walk: (walk.vertices, walk.edges))),
        boundary_edges=boundary_edges,
        balanced=balanced,
        simple=simple,
        euler=euler,
        orientable=_orientable(table, faces, edges),
        reduced_genus=reduced_genus,
        enclosed=enclosed,
        delta=delta,
        interior_vertices=vertices,
        interior_edges=edges,
    )


def _superfaces_of(table, edge_set, found):
    """Add the superfaces of one subgraph to ``found`` keyed by region and boundary."""
    roots = table.regions(edge_set)
    walks = table.trace(edge_set)
    by_root = defaultdict(list)
    for walk in walks:
        by_root[roots[walk.face]].append(walk)
    members = defaultdict(set)
    for index, root in enumerate(roots):
        members[root].add(index)
    for root, faces in members.items():
        own = by_root[root]
        key = (frozenset(faces), frozenset(e for walk in own for e in walk.edges))
        if key not in found:
            found[key] = _describe(table, faces, own)


def _subgraph_masks(table):
    """Edge subsets whose vertices all have degree 0 or at least 2."""
    count = len(table.edge_ids)
    masks = np.arange(1, 1 << count, dtype=np.int64)
    incident = defaultdict(int)
    for bit, edge_id in enumerate(table.edge_ids):
        edge = table.mesh.edges[edge_id]
        incident[edge.u] |= 1 << bit
        incident[edge.v] |= 1 << bit
    keep = np.ones(len(masks), dtype=bool)
    for bits in incident.values():
        degree = popcount(masks & bits, count)
        keep &= (degree == 0) | (degree >= 2)
    return masks[keep]


def enumerate_superfaces(mesh, budget=ENUMERATION_BUDGET, workers=None):
    """Every superface of every admissible subgraph, deduplicated."""
    if len(mesh.edges) > budget:
        raise BudgetExceededError(
            f"{len(mesh.edges)} edges exceed the enumeration budget {budget}; "
            "use the targeted mode"
        )
    table = _FaceTable(mesh)
    masks = _subgraph_masks(table)
    chunks = np.array_split(masks, max(1, min(len(masks), 8)))

    def visit(chunk):
        found = {}
        for mask in chunk:
            edge_set = {e for bit, e in enumerate(table.edge_ids) if int(mask) >> bit & 1}
            _superfaces_of(table, edge_set, found)
        return found

    merged = {}
    for found in parallel_map(visit, chunks, workers):
        for key, report in found.items():
            merged.setdefault(key, report)
    reports = sorted(merged.values(), key=_report_key)
    logger.debug("enumerated %d superfaces from %d subgraphs", len(reports), len(masks))
    return reports


def _report_key(report):
    return (report.region, tuple(sorted(report.boundary_edges)))


def alternate_delta(report):
    """The alternative expression sum(|d|-3) - 6 g_r(U) + sum_I(|c|-3)."""
    return (
        sum(length - 3 for length in report.lengths)
        - 6 * report.reduced_genus
        + sum(length - 3 for _, length in report.enclosed)
    )


def _targeted_superfaces(mesh):
    """Superfaces of the densest subgraph found by the flow oracle."""
    verdict = check_36_flow(mesh.graph())
    if verdict.status == TIGHT:
        return verdict, []
    table = _FaceTable(mesh)
    dense = nx.k_core(mesh.graph().subgraph(verdict.witness).copy(), 2)
    candidates = [set(dense.nodes)] + [set(part) for part in nx.connected_components(dense)]
    found = {}
    for vertices in candidates:
        edge_set = {
            data["id"] for u, v, data in dense.edges(data=True) if u in vertices and v in vertices
        }
        if edge_set:
            _superfaces_of(table, edge_set, found)
    return verdict, sorted(found.values(), key=_report_key)


def check_girth(mesh, budget=ENUMERATION_BUDGET, mode="auto", workers=None):
    """Whether every balanced superface has delta >= 0.

    ``mode`` is ``exhaustive``, ``targeted`` or ``auto`` (exhaustive within
    the enumeration budget).
    """
    if mesh.maxwell_count != 6:
        raise MeshValidationError("girth inequalities need f = 6", mesh.maxwell_count)
    if mode == "auto":
        mode = "exhaustive" if len(mesh.edges) <= budget else "targeted"
    if mode == "exhaustive":
        reports = enumerate_superfaces(mesh, budget, workers)
    elif mode == "targeted":
        verdict, reports = _targeted_superfaces(mesh)
        if verdict.status == TIGHT:
            return GirthVerdict(True, None, 0, mode)
    else:
        raise ValueError(f"unknown girth mode {mode}")
    balanced = [report for report in reports if report.balanced]
    disagreements = sum(
        (alternate_delta(report) >= 0) != (report.delta >= 0) for report in balanced
    )
    violators = [report for report in balanced if report.delta < 0]
    if mode == "targeted" and not violators:
        raise ConsistencyError("flow oracle found a dense subgraph but no violating superface")
    worst = min(violators, key=lambda report: (report.delta, _report_key(report)), default=None)
    logger.debug(
        "girth check (%s): %d balanced superfaces, %d violating",
        mode,
        len(balanced),
        len(violators),
    )
    return GirthVerdict(worst is None, worst, len(balanced), mode, disagreements)


def complement_check(mesh, report):
    """Evaluate the three equivalent forms of the complement inequality."""
    if not (report.balanced and report.simple):
        raise MoveError("superface must be balanced and simple")
    table = _FaceTable(mesh)
    index = {walk.face_id: i for i, walk in enumerate(table.faces)}
    faces = frozenset(index[face] for face in report.region)
    rest = frozenset(range(len(table.faces))) - faces
    boundary = report.boundary_edges
    outer = [walk for walk in table.trace(boundary) if walk.face in rest]
    vertices, edges = _interior(table, rest, boundary)
    s_outer = len(outer)
    euler = len(vertices) - len(edges) + len(rest) + s_outer
    genus = Fraction(2 - euler, 2)
    f_complement = 3 * (len(mesh.vertices) - len(report.interior_vertices)) - (
        len(mesh.edges) - len(report.interior_edges)
    )
    walk_quantity = (
        sum(walk.length - 3 for walk in outer)
        + sum(table.lengths[i] - 3 for i in rest if table.is_hole[i])
        - 6 * genus
    )
    if walk_quantity != f_complement - 6:
        raise ConsistencyError(
            f"face walk identity fails on the complement: {walk_quantity} != {f_complement - 6}"
        )
    closed = len(mesh.vertices) - len(mesh.edges) + len(table.faces)
    if Fraction(2 - closed, 2) != report.reduced_genus + genus + report.s - 1:
        raise ConsistencyError("reduced genus addition formula fails")
    return ComplementReport(
        count_holds=f_complement >= 6,
        walk_form_holds=walk_quantity >= 0,
        delta_holds=report.delta >= 0,
        f_complement=f_complement,
        walk_quantity=int(walk_quantity),
        delta=report.delta,
        complement_genus=genus,
    )


@dataclass
class RepairResult:
    mesh: object
    log: MoveLog
    ok: bool
    diagnostic: str = ""

    @property
    def moves(self):
        return len(self.log)

    def as_dict(self):
        return {
            "ok": self.ok,
            "moves": self.moves,
            "diagnostic": self.diagnostic,
            "log": self.log.to_dict(),
        }


def _interior_walk_edge(mesh, report):
    for edge_id in sorted(report.boundary_edges):
        sides = mesh.edge_faces(edge_id)
        if len(set(sides)) == 2 and not any(side in mesh.holes for side in sides):
            return edge_id
    raise ConsistencyError("no interior edge on a violating boundary walk")


def repair(mesh, max_moves=REPAIR_MAX_MOVES, budget=ENUMERATION_BUDGET, workers=None):
    """Subdivide around violating walks until the girth inequalities hold."""
    log = MoveLog()
    f = mesh.maxwell_count
    while True:
        verdict = check_girth(mesh, budget=budget, workers=workers)
        if verdict.ok:
            logger.info("repair finished after %d moves", len(log))
            return RepairResult(mesh, log, True)
        if len(log) >= max_moves:
            message = f"{max_moves} moves used; worst delta {verdict.worst.delta}"
            logger.warning("repair stopped: %s", message)
            return RepairResult(mesh, log, False, message)
        edge_id = _interior_walk_edge(mesh, verdict.worst)
        logger.info("repair move %d: delta %d, edge %d", len(log) + 1, verdict.worst.delta, edge_id)
        mesh = log.apply(mesh, "barycentric_local", edge=edge_id)
        if mesh.maxwell_count != f:
            raise ConsistencyError("barycentric move changed the Maxwell count")


def extend_join(mesh, hole, other, other_hole, alignment=None, max_moves=REPAIR_MAX_MOVES):
    """Join a triangulated piece onto a tight mesh, then repair."""
    joined = join(mesh, hole, other, other_hole, alignment)
    if joined.maxwell_count != 6:
        raise MoveError(f"joined mesh has f = {joined.maxwell_count}, not 6")
    return repair(joined, max_moves=max_moves)
