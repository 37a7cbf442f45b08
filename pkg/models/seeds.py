"""
Tight building blocks: small seed surfaces and the bordered pieces glued
together by the tower constructions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import networkx as nx

from SurfaceScope.models.mesh import MeshDraft, SurfaceMesh, capped, from_triangles, relabel
from SurfaceScope.models.moves import collar, open_face, perimeter_split, zero_extension
from SurfaceScope.utils.errors import MoveError
from SurfaceScope.utils.logger import get_logger

logger = get_logger(__name__)

REDUCED_GENUS = {"sphere": Fraction(0), "projective": Fraction(1, 2), "torus": Fraction(1)}

# projective plane minus a disc: a Moebius band with boundary 0-1-2-3-4-5
MOEBIUS_TRIANGLES = (
    (0, 1, 4),
    (0, 4, 3),
    (1, 2, 5),
    (1, 5, 4),
    (2, 3, 0),
    (2, 0, 5),
)


@dataclass(frozen=True)
class PieceKind:
    surface: str
    holes: int = 2

    def __post_init__(self):
        if self.surface not in REDUCED_GENUS:
            raise ValueError(f"unknown piece surface {self.surface}")
        if self.holes not in (1, 2, 3):
            raise ValueError("a piece has 1, 2 or 3 holes")

    @property
    def reduced_genus(self):
        return REDUCED_GENUS[self.surface]


def complete_graph(n):
    return nx.complete_graph(n)


def disc():
    """A single triangle bounded by a hole of length 3."""
    return from_triangles([(0, 1, 2)])


def sphere_k3():
    """K3 embedded in the sphere with two triangle faces."""
    return capped(disc())


def discus(r):
    """The r-cycle ``0..r-1`` with apexes ``r`` and ``r + 1`` joined to it."""
    if r < 3:
        raise ValueError("discus needs r >= 3")
    graph = nx.cycle_graph(r)
    for apex in (r, r + 1):
        graph.add_edges_from((apex, i) for i in range(r))
    return graph


def discus_mesh(r):
    """The discus graph as a triangulated sphere (a bipyramid)."""
    if r < 3:
        raise ValueError("discus needs r >= 3")
    triangles = []
    for i in range(r):
        triangles.append((i, (i + 1) % r, r))
        triangles.append((i, (i + 1) % r, r + 1))
    return from_triangles(triangles)


def octahedron():
    return discus_mesh(4)


def double_banana():
    """Two K5-minus-an-edge graphs glued along the hinge ``0 1``."""
    graph = nx.Graph()
    for block in ((0, 1, 2, 3, 4), (0, 1, 5, 6, 7)):
        graph.add_edges_from(
            (u, v) for i, u in enumerate(block) for v in block[i + 1 :] if {u, v} != {0, 1}
        )
    return graph


def cycle_annulus(d):
    """A d-cycle whose two faces are both holes."""
    if d < 3:
        raise ValueError("a cycle needs d >= 3")
    draft = MeshDraft()
    for i in range(d):
        draft.add_vertex(i)
    for i in range(d):
        draft.add_edge(i, (i + 1) % d, 1, i)
    for i in range(d):
        draft.rotation[i] = [((i - 1) % d, 1), (i, 0)]
    darts = [(i, end) for i in range(d) for end in (0, 1)]
    return draft.freeze(darts)


def projective_seed():
    """A tight projective plane minus a disc, hole length 6."""
    band = from_triangles(MOEBIUS_TRIANGLES)
    (hole,) = band.holes
    return collar(band, hole)


def _torus_vertex(i, j):
    return 4 * (i % 4) + (j % 4)


def torus_seed():
    """A tight torus minus a disc, hole length 9.

    The 4 x 4 grid torus with the stars of one triangle's vertices removed;
    the triangle on (3,1), (3,2), (0,2) stays clear of the hole.
    """
    removed = {_torus_vertex(0, 0), _torus_vertex(1, 0), _torus_vertex(1, 1)}
    triangles = []
    for i in range(4):
        for j in range(4):
            for triangle in (
                ((i, j), (i + 1, j), (i + 1, j + 1)),
                ((i, j), (i + 1, j + 1), (i, j + 1)),
            ):
                ids = tuple(_torus_vertex(*point) for point in triangle)
                if not removed & set(ids):
                    triangles.append(ids)
    mesh = from_triangles(triangles)
    mapping = {old: new for new, old in enumerate(mesh.vertices)}
    return relabel(mesh, mapping)


def _base(surface):
    if surface == "sphere":
        return cycle_annulus(3)
    if surface == "projective":
        return projective_seed()
    return torus_seed()


def _open_beside_hole(mesh):
    """Turn a triangle sharing an edge with the only hole into a second hole."""
    (hole,) = mesh.holes
    walk = mesh.face(hole)
    on_hole = set(walk.vertices)
    rim = set(walk.edge_ids)
    best = None
    for triangle in mesh.triangle_faces:
        if not rim & set(triangle.edge_ids):
            continue
        off = any(vertex not in on_hole for vertex in triangle.vertices)
        if best is None or (off and not best[0]):
            best = (off, triangle.face_id)
        if off:
            break
    if best is None:
        raise MoveError("no triangle shares an edge with the hole")
    return open_face(mesh, best[1]), best[1]


def _newest_hole(mesh):
    newest = max(mesh.vertices)
    return next(hole for hole in sorted(mesh.holes) if newest in mesh.face(hole).vertices)


def piece(kind, delta):
    """Two-holed piece with entrance ``delta`` and exit ``delta + 6 g_r``.

    The holes are vertex-disjoint cycles and the Maxwell count is
    ``2 * delta``.
    """
    if isinstance(kind, str):
        kind = PieceKind(kind)
    if delta < 3:
        raise ValueError("entrance length must be at least 3")
    mesh = _base(kind.surface)
    if kind.surface != "sphere":
        mesh, _ = _open_beside_hole(mesh)

    def ends(current):
        # the entrance is the shorter hole; ties only happen on the sphere
        return sorted(current.holes, key=lambda hole: (current.hole_length(hole), hole))

    for step in range(delta - 3):
        entrance, exit_hole = ends(mesh)
        shared = sorted(
            edge_id
            for edge_id in mesh.face(entrance).edge_ids
            if set(mesh.edge_faces(edge_id)) == {entrance, exit_hole}
        )
        mesh = perimeter_split(mesh, shared[0] if step % 2 == 0 else shared[-1])
    entrance, exit_hole = ends(mesh)
    mesh = collar(mesh, exit_hole)
    exit_hole = _newest_hole(mesh)
    meta = {
        "piece": {
            "surface": kind.surface,
            "entrance": list(entrance),
            "exits": [list(exit_hole)],
        }
    }
    logger.debug("built %s piece with entrance %d", kind.surface, delta)
    return SurfaceMesh(mesh.vertices, dict(mesh.edges), dict(mesh.rotation), mesh.holes, meta)


def sphere_pants(lb, lc):
    """Sphere minus three discs with boundary lengths ``lb + lc - 3``, ``lb``, ``lc``."""
    if lb < 3 or lc < 3:
        raise ValueError("pants boundary lengths must be at least 3")
    d = lb + lc - 3
    mesh = cycle_annulus(d)
    entrance, inner = sorted(mesh.holes)
    walk = mesh.face(inner)
    anchors = (walk.vertices[0], walk.vertices[1], walk.vertices[lb - 1])
    keep = [(anchors[1], anchors[2]), (anchors[2], anchors[0])]
    mesh = zero_extension(mesh, inner, anchors, keep_holes=keep)
    split = max(mesh.vertices)
    legs = {
        mesh.hole_length(hole): hole
        for hole in mesh.holes
        if hole != entrance and split in mesh.face(hole).vertices
    }
    exits = []
    first = legs[lb]
    second = next(hole for hole in mesh.holes if hole not in (entrance, first))
    mesh = collar(mesh, first)
    exits.append(_newest_hole(mesh))
    mesh = collar(mesh, second)
    exits.append(_newest_hole(mesh))
    meta = {
        "piece": {
            "surface": "sphere",
            "entrance": list(entrance),
            "exits": [list(hole) for hole in exits],
        }
    }
    return SurfaceMesh(mesh.vertices, dict(mesh.edges), dict(mesh.rotation), mesh.holes, meta)


BUILDERS = {
    "disc": disc,
    "sphere_k3": sphere_k3,
    "octahedron": octahedron,
    "discus_mesh": discus_mesh,
    "cycle_annulus": cycle_annulus,
    "projective_seed": projective_seed,
    "torus_seed": torus_seed,
    "sphere_pants": sphere_pants,
    "piece": piece,
}


def build_named_mesh(name, args=None):
    """Call a registered builder with keyword arguments."""
    if name not in BUILDERS:
        raise MoveError(f"unknown builder {name}")
    return BUILDERS[name](**dict(args or {}))
