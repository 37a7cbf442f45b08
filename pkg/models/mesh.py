"""
Graphs cellularly embedded in surfaces, stored as signed rotation systems.

A dart is a pair ``(edge_id, end)``: end 0 sits at ``edge.u`` and end 1 at
``edge.v``. The corner named by a dart ``d`` is the wedge between ``d`` and its
rotation successor. Faces are traced with the sign rule and named by the least
corner they pass; holes are faces carrying a boundary marker.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import networkx as nx

from SurfaceScope.utils.errors import (
    ConsistencyError,
    MeshFormatError,
    MeshValidationError,
)
from SurfaceScope.utils.logger import get_logger

FORMAT = "srs-mesh/1"

logger = get_logger(__name__)


def opposite(dart):
    """The other end of a dart's edge."""
    return (dart[0], 1 - dart[1])


@dataclass(frozen=True)
class Edge:
    """An edge record; the sign is -1 for orientation-reversing edges."""

    id: int
    u: int
    v: int
    sign: int = 1

    def end_vertex(self, end):
        return self.u if end == 0 else self.v

    def other(self, vertex):
        return self.v if vertex == self.u else self.u

    def end_at(self, vertex):
        """End index of the edge at ``vertex``."""
        if vertex == self.u:
            return 0
        if vertex == self.v:
            return 1
        raise ValueError(f"vertex {vertex} is not on edge {self.id}")


@dataclass(frozen=True)
class FaceWalk:
    """A traced face, started at its least corner.

    ``states[i]`` is ``(dart, orientation)`` leaving ``vertices[i]``;
    ``corners[i]`` is the corner passed at ``vertices[i]``.
    """

    states: tuple
    vertices: tuple
    corners: tuple

    @property
    def face_id(self):
        return self.corners[0]

    @property
    def length(self):
        return len(self.states)

    @property
    def darts(self):
        return tuple(state[0] for state in self.states)

    @property
    def orientations(self):
        return tuple(state[1] for state in self.states)

    @property
    def edge_ids(self):
        return tuple(state[0][0] for state in self.states)

    @property
    def is_cycle(self):
        return len(set(self.vertices)) == len(self.vertices)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`."""

    ok: bool
    kind: str = ""  # "format" or "semantic"
    reason: str = ""
    element: object = None

    def as_dict(self):
        return {
            "ok": self.ok,
            "kind": self.kind,
            "reason": self.reason,
            "element": _jsonable(self.element),
        }


@dataclass(frozen=True)
class SurfaceInvariants:
    """Counts and topological type of a mesh's surface."""

    vertices: int
    edges: int
    triangles: int
    holes: int
    boundary_lengths: tuple
    euler_closed: int
    orientable: bool
    genus: int
    reduced_genus: Fraction
    maxwell: int

    def as_dict(self):
        return {
            "V": self.vertices,
            "E": self.edges,
            "F": self.triangles,
            "r": self.holes,
            "boundary_lengths": list(self.boundary_lengths),
            "chi_closed": self.euler_closed,
            "orientable": self.orientable,
            "genus": self.genus,
            "g_r": str(self.reduced_genus),
            "f": self.maxwell,
        }


def _jsonable(value):
    if isinstance(value, (tuple, list, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(item) for item in items]
    return value


@dataclass(frozen=True)
class SurfaceMesh:
    """A signed rotation system with designated hole faces.

    Meshes are never changed in place; moves build new meshes through
    :class:`MeshDraft`.
    """

    vertices: tuple
    edges: dict
    rotation: dict
    holes: frozenset = frozenset()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        rotation = {}
        for vertex, darts in self.rotation.items():
            darts = tuple(tuple(dart) for dart in darts)
            if darts:
                start = darts.index(min(darts))
                darts = darts[start:] + darts[:start]
            rotation[vertex] = darts
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(
            self, "holes", frozenset(tuple(dart) for dart in self.holes)
        )

    # Darts and rotations

    def dart_vertex(self, dart):
        return self.edges[dart[0]].end_vertex(dart[1])

    def dart_at(self, edge_id, vertex):
        """The dart of ``edge_id`` sitting at ``vertex``."""
        return (edge_id, self.edges[edge_id].end_at(vertex))

    @cached_property
    def _position(self):
        return {
            dart: (vertex, index)
            for vertex, darts in self.rotation.items()
            for index, dart in enumerate(darts)
        }

    def succ(self, dart):
        vertex, index = self._position[dart]
        darts = self.rotation[vertex]
        return darts[(index + 1) % len(darts)]

    def pred(self, dart):
        vertex, index = self._position[dart]
        darts = self.rotation[vertex]
        return darts[index - 1]

    def darts(self):
        return sorted(self._position)

    def neighbors(self, vertex):
        """Neighbours of ``vertex`` in rotation order."""
        return [
            self.edges[dart[0]].other(vertex) for dart in self.rotation[vertex]
        ]

    def degree(self, vertex):
        return len(self.rotation[vertex])

    @cached_property
    def _edge_index(self):
        return {frozenset((edge.u, edge.v)): edge.id for edge in self.edges.values()}

    def edge_between(self, u, v):
        """Edge id joining ``u`` and ``v``, or None."""
        return self._edge_index.get(frozenset((u, v)))

    @property
    def next_vertex_id(self):
        return max(self.vertices, default=-1) + 1

    @property
    def next_edge_id(self):
        return max(self.edges, default=-1) + 1

    @property
    def maxwell_count(self):
        return 3 * len(self.vertices) - len(self.edges)

    # Faces

    def step(self, state):
        """Next tracing state after ``state``."""
        dart, orientation = state
        orientation *= self.edges[dart[0]].sign
        arrival = opposite(dart)
        if orientation > 0:
            return (self.succ(arrival), orientation)
        return (self.pred(arrival), orientation)

    def reverse_state(self, state):
        dart, orientation = state
        return (opposite(dart), -orientation * self.edges[dart[0]].sign)

    def corner(self, state):
        dart, orientation = state
        return self.pred(dart) if orientation > 0 else dart

    def orbit(self, state):
        """All states of the face orbit through ``state``."""
        states = [state]
        limit = 4 * len(self.edges) + 4
        current = self.step(state)
        while current != state:
            states.append(current)
            if len(states) > limit:
                raise ConsistencyError("face orbit does not close")
            current = self.step(current)
        return states

    def _canonical_walk(self, forward, backward):
        best = None
        for states in (forward, backward):
            corners = [self.corner(state) for state in states]
            start = corners.index(min(corners))
            corners = tuple(corners[start:] + corners[:start])
            if best is None or corners < best[1]:
                best = (tuple(states[start:] + states[:start]), corners)
        states, corners = best
        vertices = tuple(self.dart_vertex(state[0]) for state in states)
        return FaceWalk(states=states, vertices=vertices, corners=corners)

    @cached_property
    def faces(self):
        """All traced faces, sorted by face id."""
        seen = set()
        walks = []
        for dart in self.darts():
            for orientation in (1, -1):
                if (dart, orientation) in seen:
                    continue
                forward = self.orbit((dart, orientation))
                backward_start = self.reverse_state(forward[0])
                if backward_start in set(forward):
                    backward = forward
                else:
                    backward = self.orbit(backward_start)
                seen.update(forward)
                seen.update(backward)
                walks.append(self._canonical_walk(forward, backward))
        return tuple(sorted(walks, key=lambda walk: walk.face_id))

    @cached_property
    def _face_by_corner(self):
        lookup = {}
        for walk in self.faces:
            for corner in walk.corners:
                lookup[corner] = walk
        return lookup

    def face(self, face_id):
        """The face passing corner ``face_id``."""
        try:
            return self._face_by_corner[tuple(face_id)]
        except KeyError as error:
            raise MeshValidationError("no face at corner", face_id) from error

    def face_id_of(self, corner):
        return self.face(corner).face_id

    def is_hole(self, face_id):
        return self.face(face_id).face_id in self.holes

    @property
    def hole_faces(self):
        return [walk for walk in self.faces if walk.face_id in self.holes]

    @property
    def triangle_faces(self):
        return [walk for walk in self.faces if walk.face_id not in self.holes]

    def hole_length(self, hole):
        return self.face(hole).length

    def edge_faces(self, edge_id):
        """Face ids on the two sides of an edge."""
        sides = []
        for walk in self.faces:
            sides.extend(walk.face_id for dart in walk.darts if dart[0] == edge_id)
        return sides

    # Views

    def graph(self):
        """The underlying abstract graph."""
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        for edge in self.edges.values():
            graph.add_edge(edge.u, edge.v, id=edge.id, sign=edge.sign)
        return graph

    def canonical(self):
        """Same mesh with holes named by their canonical face ids."""
        holes = frozenset(self.face(dart).face_id for dart in self.holes)
        mesh = SurfaceMesh(
            self.vertices, dict(self.edges), dict(self.rotation), holes, dict(self.meta)
        )
        # same rotation system, so the traced faces carry over
        mesh.__dict__["faces"] = self.faces
        return mesh

    def to_dict(self):
        document = {
            "format": FORMAT,
            "vertices": list(self.vertices),
            "edges": [
                {"id": edge.id, "u": edge.u, "v": edge.v, "sign": edge.sign}
                for edge in sorted(self.edges.values(), key=lambda edge: edge.id)
            ],
            "rotation": {
                str(vertex): [list(dart) for dart in self.rotation[vertex]]
                for vertex in self.vertices
            },
            "holes": [list(dart) for dart in sorted(self.holes)],
        }
        if "piece" in self.meta:
            document["piece"] = self.meta["piece"]
        return document

    def to_json(self):
        """Canonical serialization; equal meshes give identical text."""
        return json.dumps(self.canonical().to_dict(), indent=4, sort_keys=True)

    @classmethod
    def from_dict(cls, document):
        """Load an ``srs-mesh/1`` document, checking references first."""
        if not isinstance(document, dict) or document.get("format") != FORMAT:
            raise MeshFormatError(f"expected format {FORMAT}")
        try:
            vertices = [int(vertex) for vertex in document["vertices"]]
            edges = {}
            for record in document["edges"]:
                edge = Edge(
                    int(record["id"]),
                    int(record["u"]),
                    int(record["v"]),
                    int(record.get("sign", 1)),
                )
                if edge.id in edges:
                    raise MeshFormatError(f"duplicate edge id {edge.id}")
                edges[edge.id] = edge
            rotation = {
                int(vertex): [(int(dart[0]), int(dart[1])) for dart in darts]
                for vertex, darts in document["rotation"].items()
            }
            holes = [(int(dart[0]), int(dart[1])) for dart in document.get("holes", [])]
        except (KeyError, TypeError, IndexError) as error:
            raise MeshFormatError(f"malformed mesh document: {error}") from error
        meta = {"piece": document["piece"]} if "piece" in document else {}
        mesh = cls(vertices, edges, rotation, frozenset(holes), meta)
        report = check_references(mesh)
        if not report.ok:
            raise MeshFormatError(f"{report.reason}: {report.element}")
        try:
            return mesh.canonical()
        except (ConsistencyError, MeshValidationError) as error:
            raise MeshFormatError(f"holes do not name faces: {error}") from error


class MeshDraft:
    """Mutable working copy used by moves and builders."""

    def __init__(self, mesh=None):
        self.vertices = set(mesh.vertices) if mesh else set()
        self.edges = dict(mesh.edges) if mesh else {}
        self.rotation = (
            {vertex: list(darts) for vertex, darts in mesh.rotation.items()}
            if mesh
            else {}
        )
        self._next_vertex = mesh.next_vertex_id if mesh else 0
        self._next_edge = mesh.next_edge_id if mesh else 0

    def add_vertex(self, vertex=None):
        if vertex is None:
            vertex = self._next_vertex
        self.vertices.add(vertex)
        self.rotation.setdefault(vertex, [])
        self._next_vertex = max(self._next_vertex, vertex + 1)
        return vertex

    def add_edge(self, u, v, sign=1, edge_id=None):
        """Add an edge record; rotations are left to the caller."""
        if edge_id is None:
            edge_id = self._next_edge
        self.edges[edge_id] = Edge(edge_id, u, v, sign)
        self._next_edge = max(self._next_edge, edge_id + 1)
        return edge_id

    def set_edge(self, edge):
        self.edges[edge.id] = edge

    def insert_after(self, vertex, anchor, dart):
        darts = self.rotation[vertex]
        darts.insert(darts.index(anchor) + 1, dart)

    def remove_edge(self, edge_id):
        edge = self.edges.pop(edge_id)
        for end, vertex in enumerate((edge.u, edge.v)):
            if vertex in self.rotation and (edge_id, end) in self.rotation[vertex]:
                self.rotation[vertex].remove((edge_id, end))
        return edge

    def remove_vertex(self, vertex):
        self.vertices.discard(vertex)
        self.rotation.pop(vertex, None)

    def switch(self, vertex):
        """Reverse the rotation at ``vertex`` and flip its edge signs."""
        self.rotation[vertex] = list(reversed(self.rotation[vertex]))
        for dart in self.rotation[vertex]:
            edge = self.edges[dart[0]]
            self.edges[edge.id] = Edge(edge.id, edge.u, edge.v, -edge.sign)

    def freeze(self, hole_corners=(), meta=None, check=True):
        """Build the mesh; holes are the faces through ``hole_corners``."""
        mesh = SurfaceMesh(
            tuple(self.vertices),
            dict(self.edges),
            {vertex: tuple(darts) for vertex, darts in self.rotation.items()},
            frozenset(tuple(corner) for corner in hole_corners),
            dict(meta or {}),
        ).canonical()
        if check:
            report = validate(mesh)
            if not report.ok:
                raise ConsistencyError(
                    f"move produced an invalid mesh: {report.reason} {report.element}"
                )
        return mesh


def trace_faces(mesh):
    """Face walks of a mesh, one per face."""
    return list(mesh.faces)


def check_references(mesh):
    """Format-level checks: every reference points at something real."""
    vertices = set(mesh.vertices)
    if len(vertices) != len(mesh.vertices):
        return ValidationReport(False, "format", "duplicate vertex", None)
    for edge_id, edge in mesh.edges.items():
        if edge.id != edge_id:
            return ValidationReport(False, "format", "edge id mismatch", edge_id)
        if edge.u not in vertices or edge.v not in vertices:
            return ValidationReport(False, "format", "edge endpoint missing", edge_id)
        if edge.sign not in (1, -1):
            return ValidationReport(False, "format", "edge sign not +1/-1", edge_id)
    if set(mesh.rotation) != vertices:
        return ValidationReport(
            False, "format", "rotation keys differ from vertices", None
        )
    seen = set()
    for vertex, darts in mesh.rotation.items():
        for dart in darts:
            if len(dart) != 2 or dart[1] not in (0, 1):
                return ValidationReport(False, "format", "malformed dart", dart)
            if dart[0] not in mesh.edges:
                return ValidationReport(False, "format", "dart references missing edge", dart)
            if mesh.edges[dart[0]].end_vertex(dart[1]) != vertex:
                return ValidationReport(False, "format", "dart at wrong vertex", dart)
            if dart in seen:
                return ValidationReport(False, "format", "dart repeated", dart)
            seen.add(dart)
    for edge_id in mesh.edges:
        for end in (0, 1):
            if (edge_id, end) not in seen:
                return ValidationReport(False, "format", "dart missing from rotation", (edge_id, end))
    for dart in mesh.holes:
        if dart not in seen:
            return ValidationReport(False, "format", "hole references missing dart", dart)
    return ValidationReport(True)


def validate(mesh):
    """Check every mesh invariant; report the first violation."""
    report = check_references(mesh)
    if not report.ok:
        return report
    if not mesh.edges:
        return ValidationReport(False, "semantic", "mesh has no edges", None)
    pairs = set()
    for edge in mesh.edges.values():
        if edge.u == edge.v:
            return ValidationReport(False, "semantic", "loop", edge.id)
        pair = frozenset((edge.u, edge.v))
        if pair in pairs:
            return ValidationReport(False, "semantic", "parallel edges", edge.id)
        pairs.add(pair)
    if not nx.is_connected(mesh.graph()):
        return ValidationReport(False, "semantic", "disconnected", None)
    try:
        faces = mesh.faces
    except ConsistencyError as error:
        return ValidationReport(False, "semantic", str(error), None)
    hole_ids = {mesh.face(dart).face_id for dart in mesh.holes}
    for walk in faces:
        if walk.face_id in hole_ids:
            if walk.length < 3 or not walk.is_cycle:
                return ValidationReport(False, "semantic", "hole is not a cycle", walk.face_id)
        elif walk.length != 3:
            return ValidationReport(False, "semantic", "nontriangular face", walk.face_id)
        elif not walk.is_cycle:
            return ValidationReport(False, "semantic", "degenerate triangle", walk.face_id)
    return ValidationReport(True)


def is_orientable_switching(mesh):
    """Orientability by searching for a switching that makes all signs +1."""
    switch = {}
    adjacency = defaultdict(list)
    for edge in mesh.edges.values():
        adjacency[edge.u].append((edge.v, edge.sign))
        adjacency[edge.v].append((edge.u, edge.sign))
    for root in mesh.vertices:
        if root in switch:
            continue
        switch[root] = 1
        queue = deque([root])
        while queue:
            vertex = queue.popleft()
            for other, sign in adjacency[vertex]:
                wanted = sign * switch[vertex]
                if other not in switch:
                    switch[other] = wanted
                    queue.append(other)
                elif switch[other] != wanted:
                    return False
    return True


def is_orientable_cycles(mesh):
    """Orientability by checking the sign product of a cycle basis."""
    graph = mesh.graph()
    for cycle in nx.cycle_basis(graph):
        product = 1
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            product *= graph.edges[u, v]["sign"]
        if product < 0:
            return False
    return True


def surface_invariants(mesh):
    """Counts, Euler characteristic, orientability and genus of a mesh."""
    report = validate(mesh)
    if not report.ok:
        raise MeshValidationError(report.reason, report.element)
    orientable = is_orientable_switching(mesh)
    if orientable != is_orientable_cycles(mesh):
        raise ConsistencyError("orientability tests disagree")
    holes = mesh.hole_faces
    n_faces = len(mesh.faces)
    chi = len(mesh.vertices) - len(mesh.edges) + n_faces
    reduced_genus = Fraction(2 - chi, 2)
    genus = (2 - chi) // 2 if orientable else 2 - chi
    excess = sum(walk.length - 3 for walk in mesh.faces)
    if excess != 6 * reduced_genus + mesh.maxwell_count - 6:
        raise ConsistencyError(
            f"face walk identity fails: {excess} != 6*{reduced_genus} + "
            f"{mesh.maxwell_count} - 6"
        )
    return SurfaceInvariants(
        vertices=len(mesh.vertices),
        edges=len(mesh.edges),
        triangles=n_faces - len(holes),
        holes=len(holes),
        boundary_lengths=tuple(sorted(walk.length for walk in holes)),
        euler_closed=chi,
        orientable=orientable,
        genus=genus,
        reduced_genus=reduced_genus,
        maxwell=mesh.maxwell_count,
    )


def cap_hole(mesh, hole):
    """Clear the boundary marker of one hole."""
    face_id = mesh.face(hole).face_id
    if face_id not in mesh.holes:
        raise MeshValidationError("not a hole", hole)
    return SurfaceMesh(
        mesh.vertices, dict(mesh.edges), dict(mesh.rotation), mesh.holes - {face_id}
    )


def capped(mesh):
    """The same embedding with every hole treated as a face."""
    return SurfaceMesh(mesh.vertices, dict(mesh.edges), dict(mesh.rotation), frozenset())


def relabel(mesh, mapping):
    """Isomorphic copy with vertices renamed by ``mapping``."""
    edges = {
        edge_id: Edge(edge_id, mapping[edge.u], mapping[edge.v], edge.sign)
        for edge_id, edge in mesh.edges.items()
    }
    rotation = {mapping[vertex]: darts for vertex, darts in mesh.rotation.items()}
    return SurfaceMesh(
        tuple(mapping[vertex] for vertex in mesh.vertices),
        edges,
        rotation,
        mesh.holes,
        dict(mesh.meta),
    ).canonical()


def normalize_signs(mesh):
    """Switch vertices until no single switch adds a +1 edge.

    Orientable meshes end with every sign +1.
    """
    draft = MeshDraft(mesh)
    corners = [mesh.face(hole).face_id for hole in sorted(mesh.holes)]

    def switch(vertex):
        # the corner named d becomes the corner named by its old successor
        darts = draft.rotation[vertex]
        for position, corner in enumerate(corners):
            if corner in darts:
                corners[position] = darts[(darts.index(corner) + 1) % len(darts)]
        draft.switch(vertex)

    for u, v in nx.bfs_edges(mesh.graph(), mesh.vertices[0]):
        if draft.edges[mesh.edge_between(u, v)].sign < 0:
            switch(v)
    improved = True
    while improved:
        improved = False
        for vertex in sorted(draft.vertices):
            gain = sum(-draft.edges[dart[0]].sign for dart in draft.rotation[vertex])
            if gain > 0:
                switch(vertex)
                improved = True
    return draft.freeze(corners, meta=mesh.meta)


def from_triangles(triangles, meta=None):
    """Build a mesh from a list of vertex triples.

    Triangles are oriented coherently wherever the surface allows it and edge
    signs record the remaining disagreements. Traced faces that match no input
    triangle become holes.
    """
    tris = [tuple(int(vertex) for vertex in triangle) for triangle in triangles]
    for triangle in tris:
        if len(set(triangle)) != 3:
            raise MeshValidationError("degenerate triangle", triangle)
    vertices = sorted({vertex for triangle in tris for vertex in triangle})
    pairs = sorted(
        {tuple(sorted(pair)) for triangle in tris for pair in combinations(triangle, 2)}
    )
    edge_ids = {pair: index for index, pair in enumerate(pairs)}
    edge_tris = defaultdict(list)
    for index, triangle in enumerate(tris):
        for pair in combinations(triangle, 2):
            edge_tris[tuple(sorted(pair))].append(index)
    for pair, incident in edge_tris.items():
        if len(incident) > 2:
            raise MeshValidationError("edge in more than two triangles", pair)

    oriented = [None] * len(tris)
    for start, triangle in enumerate(tris):
        if oriented[start] is not None:
            continue
        oriented[start] = triangle
        queue = deque([start])
        while queue:
            index = queue.popleft()
            a, b, c = oriented[index]
            for x, y in ((a, b), (b, c), (c, a)):
                for other in edge_tris[tuple(sorted((x, y)))]:
                    if oriented[other] is None:
                        third = next(w for w in tris[other] if w not in (x, y))
                        oriented[other] = (y, x, third)
                        queue.append(other)

    def agrees(index, triple):
        a, b, c = oriented[index]
        return triple in ((a, b, c), (b, c, a), (c, a, b))

    rotation = {}
    local_sign = {}
    for vertex in vertices:
        at_vertex = [index for index, triangle in enumerate(tris) if vertex in triangle]
        by_neighbor = defaultdict(list)
        for index in at_vertex:
            for other in tris[index]:
                if other != vertex:
                    by_neighbor[other].append(index)
        ends = sorted(w for w, incident in by_neighbor.items() if len(incident) == 1)
        if len(ends) not in (0, 2):
            raise MeshValidationError("vertex link is not a cycle or path", vertex)
        if ends:
            starts = [(w, by_neighbor[w][0]) for w in ends]
        else:
            first = at_vertex[0]
            a, b, c = oriented[first]
            i = (a, b, c).index(vertex)
            starts = [((a, b, c)[(i + 1) % 3], first)]
        chosen = None
        for start, index in starts:
            second = next(w for w in tris[index] if w not in (vertex, start))
            if chosen is None or agrees(index, (vertex, start, second)):
                chosen = (start, index, second)
                if agrees(index, (vertex, start, second)):
                    break
        start, index, second = chosen
        sequence = [start, second]
        used = [index]
        while True:
            current = sequence[-1]
            following = [t for t in by_neighbor[current] if t != used[-1]]
            if not following:
                break
            index = following[0]
            nxt = next(w for w in tris[index] if w not in (vertex, current))
            used.append(index)
            if nxt == sequence[0]:
                break
            sequence.append(nxt)
        if len(used) != len(at_vertex) or len(set(used)) != len(used):
            raise MeshValidationError("vertex link is not a single cycle or path", vertex)
        closed = not ends
        for position, index in enumerate(used):
            a = sequence[position]
            b = sequence[(position + 1) % len(sequence)] if closed else sequence[position + 1]
            local_sign[(vertex, index)] = 1 if agrees(index, (vertex, a, b)) else -1
        rotation[vertex] = [
            (edge_ids[tuple(sorted((vertex, w)))], 0 if vertex < w else 1)
            for w in sequence
        ]

    draft = MeshDraft()
    for vertex in vertices:
        draft.add_vertex(vertex)
    for pair, edge_id in edge_ids.items():
        index = edge_tris[pair][0]
        sign = local_sign[(pair[0], index)] * local_sign[(pair[1], index)]
        draft.add_edge(pair[0], pair[1], sign, edge_id)
    draft.rotation = rotation
    loose = draft.freeze(check=False)
    remaining = Counter(frozenset(triangle) for triangle in tris)
    hole_corners = []
    for walk in loose.faces:
        key = frozenset(walk.vertices)
        if walk.length == 3 and remaining[key] > 0:
            remaining[key] -= 1
        else:
            hole_corners.append(walk.face_id)
    if sum(remaining.values()):
        raise MeshValidationError("triangles do not form a surface", None)
    mesh = draft.freeze(hole_corners, meta=meta, check=False)
    report = validate(mesh)
    if not report.ok:
        raise MeshValidationError(report.reason, report.element)
    logger.debug(
        "built mesh from %d triangles: V=%d E=%d holes=%d",
        len(tris),
        len(mesh.vertices),
        len(mesh.edges),
        len(mesh.holes),
    )
    return mesh
