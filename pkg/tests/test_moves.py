import pytest

from SurfaceScope.models.mesh import surface_invariants
from SurfaceScope.models.moves import (
    Alignment,
    MoveLog,
    MoveRecord,
    apply_move,
    barycentric_local,
    carve_hole,
    collar,
    disjoint_union,
    excise_region,
    join,
    perimeter_split,
    replay,
    self_join,
    vertex_split,
    zero_extension,
)
from SurfaceScope.models.seeds import (
    cycle_annulus,
    disc,
    discus_mesh,
    octahedron,
    piece,
    projective_seed,
    sphere_k3,
)
from SurfaceScope.models.sparsity import TIGHT, check_36
from SurfaceScope.utils.errors import MoveError


def _counts(mesh):
    return len(mesh.vertices), len(mesh.edges)


def test_zero_extension_in_a_triangle(octahedron_mesh):
    face = octahedron_mesh.triangle_faces[0]
    result = zero_extension(octahedron_mesh, face.face_id, face.vertices)
    assert _counts(result) == (7, 15)
    assert result.maxwell_count == 6
    assert check_36(result).status == TIGHT
    assert set(octahedron_mesh.edges) <= set(result.edges)


def test_zero_extension_rejects_vertices_off_the_face(octahedron_mesh):
    face = octahedron_mesh.triangle_faces[0]
    outsider = next(v for v in octahedron_mesh.vertices if v not in face.vertices)
    with pytest.raises(MoveError):
        zero_extension(octahedron_mesh, face.face_id, face.vertices[:2] + (outsider,))


def test_vertex_split(octahedron_mesh):
    ring = octahedron_mesh.neighbors(4)
    result = vertex_split(octahedron_mesh, 4, ring[0], ring[2])
    assert _counts(result) == (7, 15)
    assert surface_invariants(result).euler_closed == 2
    assert check_36(result).status == TIGHT
    with pytest.raises(MoveError):
        vertex_split(octahedron_mesh, 4, ring[0], ring[0])


def test_perimeter_split_lengthens_both_holes():
    annulus = cycle_annulus(3)
    result = perimeter_split(annulus, 0)
    assert sorted(result.hole_length(hole) for hole in result.holes) == [4, 4]
    assert result.maxwell_count == annulus.maxwell_count + 2
    with pytest.raises(MoveError):
        perimeter_split(octahedron(), 0)


def test_collar_keeps_length_and_moves_the_hole(disc_mesh):
    (old,) = disc_mesh.holes
    result = collar(disc_mesh, old)
    (new,) = result.holes
    assert result.hole_length(new) == 3
    assert not set(result.face(new).vertices) & set(disc_mesh.vertices)
    assert _counts(result) == (6, 12)
    assert check_36(result).status == TIGHT


def test_carve_hole(octahedron_mesh):
    face = octahedron_mesh.triangle_faces[0]
    carved = carve_hole(octahedron_mesh, face.face_id)
    assert surface_invariants(carved).boundary_lengths == (3,)
    touching = next(
        walk for walk in carved.triangle_faces if set(walk.vertices) & set(face.vertices)
    )
    with pytest.raises(MoveError):
        carve_hole(carved, touching.face_id)


def test_barycentric_adds_three_vertices_and_nine_edges(octahedron_mesh):
    edge_id = min(octahedron_mesh.edges)
    result = barycentric_local(octahedron_mesh, edge_id)
    assert _counts(result) == (9, 21)
    assert result.maxwell_count == 6
    assert check_36(result).status == TIGHT


def test_barycentric_refuses_hole_edges(disc_mesh):
    with pytest.raises(MoveError):
        barycentric_local(disc_mesh, 0)


def test_excise_region(octahedron_mesh):
    cycle = [0, 1, 2, 3]
    result = excise_region(octahedron_mesh, cycle, {4})
    assert surface_invariants(result).boundary_lengths == (4,)
    assert result.maxwell_count == 6 - 3 + 4
    with pytest.raises(MoveError):
        excise_region(octahedron_mesh, [0, 1, 2], {4})


def test_join_two_discs_closes_the_sphere():
    a, b = disc(), disc()
    (hole_a,), (hole_b,) = a.holes, b.holes
    joined = join(a, hole_a, b, hole_b)
    report = surface_invariants(joined)
    assert report.holes == 0
    assert report.triangles == 2
    assert surface_invariants(sphere_k3()).as_dict() == report.as_dict()


def test_join_uses_canonical_hole_ids():
    a, b = disc(), disc()
    (hole_a,), (hole_b,) = a.holes, b.holes
    joined = join(a, hole_a, b, hole_b, Alignment(reverse=True))
    assert joined.maxwell_count == 6
    assert not joined.holes


def test_join_length_mismatch():
    torus = piece("torus", 3)
    exit_hole = tuple(torus.meta["piece"]["exits"][0])
    (hole,) = disc().holes
    with pytest.raises(MoveError):
        join(disc(), hole, torus, exit_hole)


def test_join_piece_onto_disc():
    torus = piece("torus", 3)
    (hole,) = disc().holes
    joined = join(disc(), hole, torus, tuple(torus.meta["piece"]["entrance"]))
    report = surface_invariants(joined)
    assert report.boundary_lengths == (9,)
    assert report.reduced_genus == 1
    assert report.maxwell == 6


def test_self_join_of_a_disjoint_union(disc_mesh):
    union, vertex_offset, edge_offset = disjoint_union(disc_mesh, disc_mesh)
    assert vertex_offset == 3
    assert edge_offset == 3
    (hole,) = disc_mesh.holes
    joined = self_join(union, hole, (hole[0] + edge_offset, hole[1]))
    assert not joined.holes
    assert joined.maxwell_count == 6


def test_self_join_refuses_shared_vertices():
    annulus = cycle_annulus(3)
    first, second = sorted(annulus.holes)
    with pytest.raises(MoveError):
        self_join(annulus, first, second)


def test_move_log_replays_byte_identically(disc_mesh):
    log = MoveLog()
    (hole,) = disc_mesh.holes
    mesh = log.apply(disc_mesh, "collar", hole=hole)
    face = mesh.triangle_faces[0]
    mesh = log.apply(mesh, "zero_extension", face=face.face_id, anchors=face.vertices)
    edge_id = next(
        edge_id
        for edge_id in sorted(mesh.edges)
        if not any(side in mesh.holes for side in mesh.edge_faces(edge_id))
    )
    mesh = log.apply(mesh, "barycentric_local", edge=edge_id)
    assert len(log) == 3
    again = replay(disc_mesh, MoveLog.from_dict(log.to_dict()).records)
    assert again.to_json() == mesh.to_json()


def test_unknown_moves_are_rejected(disc_mesh):
    with pytest.raises(MoveError):
        apply_move(disc_mesh, MoveRecord("flip", {}))
    with pytest.raises(MoveError):
        apply_move(disc_mesh, MoveRecord("collar", {}))
    with pytest.raises(MoveError):
        MoveLog.from_dict({"format": "other"})


def _interior_vertices(mesh):
    on_holes = {vertex for hole in mesh.hole_faces for vertex in hole.vertices}
    return [vertex for vertex in mesh.vertices if vertex not in on_holes]


def _interior_edges(mesh):
    return [
        edge_id
        for edge_id in sorted(mesh.edges)
        if len(set(mesh.edge_faces(edge_id))) == 2
        and not any(side in mesh.holes for side in mesh.edge_faces(edge_id))
    ]


def _random_move(mesh, kind, rng):
    if kind == "zero_extension":
        face = rng.choice(mesh.triangle_faces)
        return zero_extension(mesh, face.face_id, face.vertices)
    if kind == "vertex_split":
        vertex = rng.choice(_interior_vertices(mesh))
        a, b = rng.sample(mesh.neighbors(vertex), 2)
        return vertex_split(mesh, vertex, a, b, rng.randint(0, 1))
    if kind == "collar":
        return collar(mesh, rng.choice(sorted(mesh.holes)))
    return barycentric_local(mesh, rng.choice(_interior_edges(mesh)))


@pytest.mark.parametrize("kind", ["zero_extension", "vertex_split", "collar", "barycentric_local"])
def test_moves_preserve_tightness(kind, rng):
    bases = [octahedron(), discus_mesh(5), disc(), projective_seed()]
    for trial in range(200):
        mesh = bases[trial % len(bases)]
        if kind == "collar" and not mesh.holes:
            continue
        if kind == "vertex_split" and not _interior_vertices(mesh):
            mesh = collar(mesh, min(mesh.holes))
        if kind == "barycentric_local" and not _interior_edges(mesh):
            mesh = collar(mesh, min(mesh.holes))
        before = len(mesh.vertices), len(mesh.edges)
        result = _random_move(mesh, kind, rng)
        assert result.maxwell_count == mesh.maxwell_count == 6
        assert check_36(result).status == TIGHT
        if kind == "barycentric_local":
            assert (len(result.vertices), len(result.edges)) == (before[0] + 3, before[1] + 9)
