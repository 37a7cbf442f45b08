"""
Moves on embedded graphs.

Every move returns a new mesh and keeps the ids of vertices and edges it does
not touch, so construction logs can be audited and replayed.
"""
from __future__ import annotations

from dataclasses import dataclass

from SurfaceScope.models.mesh import (
    Edge,
    MeshDraft,
    SurfaceMesh,
    cap_hole,
    validate,
)
from SurfaceScope.utils.errors import ConsistencyError, MoveError
from SurfaceScope.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Alignment:
    """How two boundary cycles are matched in a join.

    ``None`` starts mean the least vertex of each cycle; both cycles are
    read in their canonical direction unless ``reverse`` is set.
    """

    start_a: int | None = None
    start_b: int | None = None
    reverse: bool = False

    def as_dict(self):
        return {"start_a": self.start_a, "start_b": self.start_b, "reverse": self.reverse}

    @classmethod
    def from_dict(cls, document):
        if document is None:
            return cls()
        return cls(document.get("start_a"), document.get("start_b"), bool(document.get("reverse")))


def _draft_has_corner(draft, corner, successor):
    edge = draft.edges.get(corner[0])
    if edge is None:
        return False
    darts = draft.rotation.get(edge.end_vertex(corner[1]), [])
    if corner not in darts:
        return False
    return darts[(darts.index(corner) + 1) % len(darts)] == successor


def _stable_corners(mesh, draft, skip=()):
    """One unchanged corner for every hole of ``mesh`` outside ``skip``."""
    corners = []
    for hole in sorted(mesh.holes - set(skip)):
        for corner in mesh.face(hole).corners:
            if _draft_has_corner(draft, corner, mesh.succ(corner)):
                corners.append(corner)
                break
        else:
            raise MoveError(f"move would consume hole {hole}")
    return corners


def _position_on(walk, vertex):
    hits = [index for index, other in enumerate(walk.vertices) if other == vertex]
    if not hits:
        raise MoveError(f"vertex {vertex} is not on face {walk.face_id}")
    if len(hits) > 1:
        raise MoveError(f"vertex {vertex} is visited twice by face {walk.face_id}")
    return hits[0]


def zero_extension(mesh, face, anchors, keep_holes=()):
    """Add a degree-3 vertex inside ``face`` joined to three of its vertices.

    Inside a hole, every arc of two or more edges between consecutive anchors
    stays a hole; ``keep_holes`` lists anchor pairs whose single-edge arc
    stays a hole as well.
    """
    walk = mesh.face(face)
    anchors = [int(anchor) for anchor in anchors]
    if len(anchors) != 3 or len(set(anchors)) != 3:
        raise MoveError("anchors must be three distinct vertices")
    positions = sorted(_position_on(walk, anchor) for anchor in anchors)
    is_hole = walk.face_id in mesh.holes
    keep = {frozenset(int(x) for x in pair) for pair in keep_holes}
    if keep and not is_hole:
        raise MoveError("only a hole can keep arcs")

    draft = MeshDraft(mesh)
    u = draft.add_vertex()
    new_edges = []
    start_corners = []
    for position in positions:
        w = walk.vertices[position]
        corner = walk.corners[position]
        orientation = walk.states[position][1]
        edge_id = draft.add_edge(u, w, orientation)
        draft.insert_after(w, corner, (edge_id, 1))
        new_edges.append(edge_id)
        start_corners.append((edge_id, 1) if orientation > 0 else corner)
    draft.rotation[u] = [(edge_id, 0) for edge_id in reversed(new_edges)]

    hole_corners = _stable_corners(mesh, draft, skip={walk.face_id})
    if is_hole:
        for index, position in enumerate(positions):
            following = positions[(index + 1) % 3]
            arc = (following - position) % walk.length
            ends = frozenset((walk.vertices[position], walk.vertices[following]))
            if arc >= 2:
                hole_corners.append(walk.corners[(position + 1) % walk.length])
            elif ends in keep:
                hole_corners.append(start_corners[index])
    return draft.freeze(hole_corners, meta=mesh.meta)


def vertex_split(mesh, v, a, b, side=0):
    """Split ``v`` into an edge ``v v'`` with ``v'`` also joined to ``a``, ``b``.

    ``side`` 0 hands ``v'`` the neighbours strictly between ``a`` and ``b``
    going forward around ``v``; side 1 hands over those between ``b`` and
    ``a``. Hole lengths are unchanged.
    """
    edge_a = mesh.edge_between(v, a)
    edge_b = mesh.edge_between(v, b)
    if a == b or edge_a is None or edge_b is None:
        raise MoveError("a and b must be distinct neighbours of v")
    if side not in (0, 1):
        raise MoveError("side must be 0 or 1")
    first, last = mesh.dart_at(edge_a, v), mesh.dart_at(edge_b, v)
    if side == 1:
        first, last = last, first
    darts = list(mesh.rotation[v])
    start = darts.index(first)
    darts = darts[start:] + darts[:start]
    cut = darts.index(last)
    transferred, rest = darts[1:cut], darts[cut + 1 :]
    first_nbr = mesh.edges[first[0]].other(v)
    last_nbr = mesh.edges[last[0]].other(v)
    first_face = mesh.face(first)
    last_face = mesh.face(mesh.pred(last))
    first_corner = first_face.corners[_position_on(first_face, first_nbr)]
    last_corner = last_face.corners[_position_on(last_face, last_nbr)]

    draft = MeshDraft(mesh)
    split = draft.add_vertex()
    spoke = draft.add_edge(v, split, 1)
    to_first = draft.add_edge(split, first_nbr, mesh.edges[first[0]].sign)
    to_last = draft.add_edge(split, last_nbr, mesh.edges[last[0]].sign)
    for dart in transferred:
        edge = mesh.edges[dart[0]]
        if dart[1] == 0:
            draft.set_edge(Edge(edge.id, split, edge.v, edge.sign))
        else:
            draft.set_edge(Edge(edge.id, edge.u, split, edge.sign))
    draft.rotation[v] = [first, (spoke, 0), last] + rest
    draft.rotation[split] = [(spoke, 1), (to_first, 0)] + transferred + [(to_last, 0)]
    draft.insert_after(first_nbr, first_corner, (to_first, 1))
    draft.insert_after(last_nbr, last_corner, (to_last, 1))
    return draft.freeze(_stable_corners(mesh, draft), meta=mesh.meta)


def perimeter_split(mesh, edge_id):
    """Subdivide an edge lying between two holes; both holes grow by one."""
    if edge_id not in mesh.edges:
        raise MoveError(f"no edge {edge_id}")
    sides = mesh.edge_faces(edge_id)
    if len(set(sides)) != 2 or not all(side in mesh.holes for side in sides):
        raise MoveError("edge must separate two holes")
    edge = mesh.edges[edge_id]
    draft = MeshDraft(mesh)
    middle = draft.add_vertex()
    tail = draft.add_edge(middle, edge.v, 1)
    draft.set_edge(Edge(edge_id, edge.u, middle, edge.sign))
    darts = draft.rotation[edge.v]
    darts[darts.index((edge_id, 1))] = (tail, 1)
    draft.rotation[middle] = [(edge_id, 1), (tail, 0)]
    return draft.freeze(_stable_corners(mesh, draft), meta=mesh.meta)


def _mark_hole(mesh, face):
    walk = mesh.face(face)
    if walk.face_id in mesh.holes:
        raise MoveError(f"face {walk.face_id} is already a hole")
    return SurfaceMesh(
        mesh.vertices,
        dict(mesh.edges),
        dict(mesh.rotation),
        mesh.holes | {walk.face_id},
        dict(mesh.meta),
    )


def carve_hole(mesh, face):
    """Mark a triangle as a hole; it must not touch any existing hole."""
    walk = mesh.face(face)
    if walk.face_id in mesh.holes or walk.length != 3:
        raise MoveError("only a triangle face can be carved")
    on_holes = {vertex for hole in mesh.hole_faces for vertex in hole.vertices}
    if on_holes & set(walk.vertices):
        raise MoveError("carved triangle shares a vertex with an existing hole")
    return _mark_hole(mesh, walk.face_id)


def open_face(mesh, face):
    """Mark a triangle as a hole with no disjointness requirement."""
    return _mark_hole(mesh, face)


def collar(mesh, hole):
    """Surround a hole by a ring of new vertices.

    The new hole has the same length and shares no vertex with the old one.
    """
    walk = mesh.face(hole)
    if walk.face_id not in mesh.holes:
        raise MoveError(f"face {walk.face_id} is not a hole")
    if not walk.is_cycle:
        raise MoveError("hole walk is not a cycle")
    ring = list(walk.vertices)
    size = len(ring)
    current, current_hole, added = mesh, walk.face_id, []
    for step in range(size):
        if step == 0:
            anchors, keep = (ring[0], ring[1], ring[2]), (ring[2], ring[0])
        elif step < size - 1:
            anchors = (ring[step + 1], ring[(step + 2) % size], added[-1])
            keep = (ring[(step + 2) % size], added[-1])
        else:
            anchors, keep = (ring[0], added[-1], added[0]), (added[0], added[-1])
        fresh = current.next_vertex_id
        current = zero_extension(current, current_hole, anchors, keep_holes=[keep])
        added.append(fresh)
        current_hole = next(
            hole_id for hole_id in sorted(current.holes)
            if fresh in current.face(hole_id).vertices
        )
    return current


def barycentric_local(mesh, edge_id):
    """Refine around an interior edge, adding three vertices and nine edges.

    Both triangles on the edge are cut into four; the old edge id is reused
    for the half joining the new midpoint to ``edge.v``.
    """
    if edge_id not in mesh.edges:
        raise MoveError(f"no edge {edge_id}")
    sides = sorted(mesh.edge_faces(edge_id))
    if len(set(sides)) != 2 or any(side in mesh.holes for side in sides):
        raise MoveError("edge must lie between two triangle faces")
    edge = mesh.edges[edge_id]
    u, v = edge.u, edge.v
    apexes = []
    for side in sides:
        third = next(x for x in mesh.face(side).vertices if x not in (u, v))
        apexes.append(third)
    first = mesh.next_vertex_id
    step1 = zero_extension(mesh, sides[0], (u, v, apexes[0]))
    second = step1.next_vertex_id
    step2 = zero_extension(step1, sides[1], (u, v, apexes[1]))
    to_first = step2.dart_at(step2.edge_between(u, first), u)
    to_second = step2.dart_at(step2.edge_between(u, second), u)
    darts = list(step2.rotation[u])
    start = darts.index(to_first)
    darts = darts[start:] + darts[:start]
    side = 0 if darts.index(step2.dart_at(edge_id, u)) < darts.index(to_second) else 1
    return vertex_split(step2, u, first, second, side)


def disjoint_union(mesh_a, mesh_b):
    """Place ``mesh_b`` beside ``mesh_a`` with shifted ids.

    Returns ``(mesh, vertex_offset, edge_offset)``. The result is disconnected
    and only meant to be glued with :func:`self_join`.
    """
    vertex_offset, edge_offset = mesh_a.next_vertex_id, mesh_a.next_edge_id
    draft = MeshDraft(mesh_a)
    for vertex in mesh_b.vertices:
        draft.add_vertex(vertex + vertex_offset)
    for edge in mesh_b.edges.values():
        draft.add_edge(
            edge.u + vertex_offset, edge.v + vertex_offset, edge.sign, edge.id + edge_offset
        )
    for vertex, darts in mesh_b.rotation.items():
        draft.rotation[vertex + vertex_offset] = [
            (dart[0] + edge_offset, dart[1]) for dart in darts
        ]
    corners = list(mesh_a.holes) + [
        (hole[0] + edge_offset, hole[1]) for hole in mesh_b.holes
    ]
    return draft.freeze(corners, check=False), vertex_offset, edge_offset


def _rotated(states, mesh, start):
    vertices = [mesh.dart_vertex(state[0]) for state in states]
    if start not in vertices:
        raise MoveError(f"alignment start {start} is not on the hole")
    index = vertices.index(start)
    return list(states[index:] + states[:index])


def self_join(mesh, hole_a, hole_b, alignment=None):
    """Identify two vertex-disjoint holes of one mesh along their cycles."""
    alignment = alignment or Alignment()
    walk_a, walk_b = mesh.face(hole_a), mesh.face(hole_b)
    for walk in (walk_a, walk_b):
        if walk.face_id not in mesh.holes:
            raise MoveError(f"face {walk.face_id} is not a hole")
        if not walk.is_cycle:
            raise MoveError("hole walk is not a cycle")
    if walk_a.face_id == walk_b.face_id:
        raise MoveError("cannot join a hole to itself")
    if walk_a.length != walk_b.length:
        raise MoveError(f"length mismatch: {walk_a.length} != {walk_b.length}")
    if set(walk_a.vertices) & set(walk_b.vertices):
        raise MoveError("holes to be joined share a vertex")
    size = walk_a.length

    start_a = min(walk_a.vertices) if alignment.start_a is None else alignment.start_a
    start_b = min(walk_b.vertices) if alignment.start_b is None else alignment.start_b
    states_a = _rotated(walk_a.states, mesh, start_a)
    states_b = list(walk_b.states)
    if alignment.reverse:
        states_b = mesh.orbit(mesh.reverse_state(states_b[0]))
    states_b = _rotated(states_b, mesh, start_b)
    xs = [mesh.dart_vertex(state[0]) for state in states_a]
    ys = [mesh.dart_vertex(state[0]) for state in states_b]
    partner = dict(zip(ys, xs))
    cycle_edges = {
        state_b[0][0]: state_a[0][0] for state_a, state_b in zip(states_a, states_b)
    }

    def to_a(dart):
        if dart[0] not in cycle_edges:
            return dart
        edge_b = mesh.edges[dart[0]]
        edge_a = mesh.edges[cycle_edges[dart[0]]]
        return (edge_a.id, edge_a.end_at(partner[edge_b.end_vertex(dart[1])]))

    to_b = {}
    for edge_b, edge_a in cycle_edges.items():
        for end in (0, 1):
            dart_b = (edge_b, end)
            to_b[to_a(dart_b)] = dart_b

    draft = MeshDraft(mesh)
    switched = set()
    for state_a, state_b, y in zip(states_a, states_b, ys):
        if state_a[1] * state_b[1] > 0:
            draft.switch(y)
            switched.add(y)

    other_corners = []
    for hole in sorted(mesh.holes - {walk_a.face_id, walk_b.face_id}):
        corner = hole
        vertex = mesh.dart_vertex(corner)
        if vertex in switched:
            corner = mesh.succ(corner)
        other_corners.append(to_a(corner) if vertex in partner else corner)

    for index in range(size):
        x, y = xs[index], ys[index]
        near = mesh.corner(states_a[index])
        far = mesh.succ(near)
        from_b, until_b = to_b[near], to_b[far]
        darts_b = draft.rotation[y]
        position = darts_b.index(from_b)
        darts_b = darts_b[position:] + darts_b[:position]
        if darts_b[-1] != until_b:
            raise ConsistencyError(f"boundary darts of {y} are not adjacent after switching")
        inner = darts_b[1:-1]
        darts_a = draft.rotation[x]
        cut = darts_a.index(near) + 1
        draft.rotation[x] = darts_a[:cut] + inner + darts_a[cut:]

    for edge_b in cycle_edges:
        draft.edges.pop(edge_b)
    for y in ys:
        draft.remove_vertex(y)
    seen = set()
    for edge_id, edge in list(draft.edges.items()):
        u, v = partner.get(edge.u, edge.u), partner.get(edge.v, edge.v)
        pair = frozenset((u, v))
        if u == v or pair in seen:
            raise MoveError(f"simplicity violation after identification at edge {edge_id}")
        seen.add(pair)
        if (u, v) != (edge.u, edge.v):
            draft.edges[edge_id] = Edge(edge_id, u, v, edge.sign)
    return draft.freeze(other_corners, meta=mesh.meta)


def join(mesh_a, hole_a, mesh_b, hole_b, alignment=None):
    """Glue ``mesh_b`` onto ``mesh_a`` along two boundary cycles of equal length.

    Ids of ``mesh_a`` are kept; ids of ``mesh_b`` are shifted past them.
    """
    alignment = alignment or Alignment()
    walk_a, walk_b = mesh_a.face(hole_a), mesh_b.face(hole_b)
    if walk_a.length != walk_b.length:
        raise MoveError(f"length mismatch: {walk_a.length} != {walk_b.length}")
    union, vertex_offset, edge_offset = disjoint_union(mesh_a, mesh_b)
    start_b = min(walk_b.vertices) if alignment.start_b is None else alignment.start_b
    shifted = Alignment(alignment.start_a, start_b + vertex_offset, alignment.reverse)
    hole_b = (walk_b.face_id[0] + edge_offset, walk_b.face_id[1])
    result = self_join(union, walk_a.face_id, hole_b, shifted)
    expected = mesh_a.maxwell_count + mesh_b.maxwell_count - 2 * walk_a.length
    if result.maxwell_count != expected:
        raise ConsistencyError("join changed the Maxwell count unexpectedly")
    return SurfaceMesh(
        result.vertices, dict(result.edges), dict(result.rotation), result.holes, dict(mesh_a.meta)
    )


def shifted_face(face_id, edge_offset):
    """Name of a ``mesh_b`` face after :func:`join` shifted its edge ids."""
    return (face_id[0] + edge_offset, face_id[1])


def excise_region(mesh, cycle, interior):
    """Remove interior vertices so that ``cycle`` becomes a hole."""
    cycle = [int(vertex) for vertex in cycle]
    interior = {int(vertex) for vertex in interior}
    if not interior or not interior <= set(mesh.vertices):
        raise MoveError("interior must be a nonempty set of mesh vertices")
    if len(cycle) < 3 or len(set(cycle)) != len(cycle) or interior & set(cycle):
        raise MoveError("boundary must be a cycle outside the interior")
    for hole in mesh.hole_faces:
        if interior & set(hole.vertices):
            raise MoveError("interior touches a hole")
    removed = sorted(
        edge.id for edge in mesh.edges.values() if edge.u in interior or edge.v in interior
    )
    gone = set(removed)
    corner = None
    for x in cycle:
        darts = mesh.rotation[x]
        for index, dart in enumerate(darts):
            if dart[0] not in gone and darts[(index + 1) % len(darts)][0] in gone:
                corner = dart
                break
        if corner is not None:
            break
    if corner is None:
        raise MoveError("region boundary differs from the given cycle")

    draft = MeshDraft(mesh)
    for edge_id in removed:
        draft.remove_edge(edge_id)
    for vertex in interior:
        draft.remove_vertex(vertex)
    result = draft.freeze([corner] + _stable_corners(mesh, draft), meta=mesh.meta, check=False)
    report = validate(result)
    if not report.ok:
        raise MoveError(f"region boundary differs from the given cycle: {report.reason}")
    walk = list(result.face(corner).vertices)
    if not _same_cycle(walk, cycle):
        raise MoveError(f"region boundary {walk} differs from the given cycle")
    if result.maxwell_count != mesh.maxwell_count - 3 * len(interior) + len(removed):
        raise ConsistencyError("excision changed the Maxwell count unexpectedly")
    return result


def _same_cycle(walk, cycle):
    if len(walk) != len(cycle) or set(walk) != set(cycle):
        return False
    start = walk.index(cycle[0])
    forward = walk[start:] + walk[:start]
    backward = [forward[0]] + forward[1:][::-1]
    return cycle in (forward, backward)


# Replayable move records


@dataclass(frozen=True)
class MoveRecord:
    """One logged move: its kind and JSON-ready parameters."""

    kind: str
    params: dict

    def as_dict(self):
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, document):
        try:
            return cls(str(document["kind"]), dict(document.get("params", {})))
        except (KeyError, TypeError) as error:
            raise MoveError(f"malformed move record: {error}") from error


def _plain(value):
    if isinstance(value, Alignment):
        return value.as_dict()
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _dart(value):
    return (int(value[0]), int(value[1]))


def _other_mesh(params):
    other = params["other"]
    if "mesh" in other:
        return SurfaceMesh.from_dict(other["mesh"])
    # builders live beside the seeds; imported here to avoid a cycle
    from SurfaceScope.models.seeds import build_named_mesh

    return build_named_mesh(other["builder"], other.get("args", {}))


def apply_move(mesh, record):
    """Apply one :class:`MoveRecord` to ``mesh``."""
    params = record.params
    try:
        if record.kind == "zero_extension":
            return zero_extension(
                mesh, _dart(params["face"]), params["anchors"], params.get("keep_holes", ())
            )
        if record.kind == "vertex_split":
            return vertex_split(
                mesh, params["vertex"], params["a"], params["b"], params.get("side", 0)
            )
        if record.kind == "perimeter_split":
            return perimeter_split(mesh, params["edge"])
        if record.kind == "carve_hole":
            return carve_hole(mesh, _dart(params["face"]))
        if record.kind == "open_face":
            return open_face(mesh, _dart(params["face"]))
        if record.kind == "cap_hole":
            return cap_hole(mesh, _dart(params["hole"]))
        if record.kind == "collar":
            return collar(mesh, _dart(params["hole"]))
        if record.kind == "barycentric_local":
            return barycentric_local(mesh, params["edge"])
        if record.kind == "excise_region":
            return excise_region(mesh, params["cycle"], params["interior"])
        if record.kind == "self_join":
            return self_join(
                mesh,
                _dart(params["hole_a"]),
                _dart(params["hole_b"]),
                Alignment.from_dict(params.get("alignment")),
            )
        if record.kind == "join":
            other = _other_mesh(params)
            other_hole = params.get("other_hole")
            if other_hole is None:
                other_hole = other.meta["piece"]["entrance"]
            return join(
                mesh,
                _dart(params["hole"]),
                other,
                _dart(other_hole),
                Alignment.from_dict(params.get("alignment")),
            )
    except KeyError as error:
        raise MoveError(f"move {record.kind} is missing parameter {error}") from error
    raise MoveError(f"unknown move kind {record.kind}")


class MoveLog:
    """Applies moves and remembers them for replay."""

    def __init__(self, records=None):
        self.records = list(records or [])

    def apply(self, mesh, kind, **params):
        record = MoveRecord(kind, _plain(params))
        result = apply_move(mesh, record)
        self.records.append(record)
        logger.debug("applied %s: V=%d E=%d", kind, len(result.vertices), len(result.edges))
        return result

    def record(self, kind, **params):
        """Log a move the caller has already applied."""
        self.records.append(MoveRecord(kind, _plain(params)))

    def extend(self, other):
        self.records.extend(other.records)

    def __len__(self):
        return len(self.records)

    def to_dict(self):
        return {"format": "moves/1", "moves": [record.as_dict() for record in self.records]}

    @classmethod
    def from_dict(cls, document):
        if not isinstance(document, dict) or document.get("format") != "moves/1":
            raise MoveError("expected format moves/1")
        return cls(MoveRecord.from_dict(item) for item in document.get("moves", []))


def replay(mesh, records):
    """Apply a sequence of records in order."""
    for record in records:
        mesh = apply_move(mesh, record)
    return mesh
