from fractions import Fraction

import networkx as nx
import pytest

from SurfaceScope.models.mesh import surface_invariants
from SurfaceScope.models.moves import join
from SurfaceScope.models.seeds import (
    PieceKind,
    build_named_mesh,
    cycle_annulus,
    disc,
    discus,
    discus_mesh,
    piece,
    projective_seed,
    sphere_pants,
    torus_seed,
)
from SurfaceScope.models.sparsity import TIGHT, check_36, check_36_exhaustive
from SurfaceScope.utils.errors import MoveError


def _hole_lengths(mesh):
    return sorted(mesh.hole_length(hole) for hole in mesh.holes)


def _disjoint_holes(mesh):
    walks = mesh.hole_faces
    return all(
        not set(a.vertices) & set(b.vertices)
        for i, a in enumerate(walks)
        for b in walks[i + 1 :]
    )


def test_disc_is_tight(disc_mesh):
    assert check_36_exhaustive(disc_mesh).status == TIGHT
    assert _hole_lengths(disc_mesh) == [3]


def test_discus_needs_three():
    with pytest.raises(ValueError):
        discus(2)
    with pytest.raises(ValueError):
        discus_mesh(2)


@pytest.mark.parametrize("r", [3, 4, 7])
def test_discus_mesh_matches_discus_graph(r):
    assert nx.is_isomorphic(discus_mesh(r).graph(), discus(r))


def test_projective_seed_is_certified():
    mesh = projective_seed()
    report = surface_invariants(mesh)
    assert _hole_lengths(mesh) == [6]
    assert report.reduced_genus == Fraction(1, 2)
    assert not report.orientable
    assert check_36_exhaustive(mesh).status == TIGHT
    (hole,) = mesh.holes
    on_hole = set(mesh.face(hole).vertices)
    assert any(not set(walk.vertices) & on_hole for walk in mesh.triangle_faces)


def test_torus_seed_is_certified():
    mesh = torus_seed()
    report = surface_invariants(mesh)
    assert _hole_lengths(mesh) == [9]
    assert report.vertices == 13
    assert report.reduced_genus == 1
    assert report.orientable
    assert check_36_exhaustive(mesh).status == TIGHT
    (hole,) = mesh.holes
    on_hole = set(mesh.face(hole).vertices)
    assert any(not set(walk.vertices) & on_hole for walk in mesh.triangle_faces)


def test_cycle_annulus():
    mesh = cycle_annulus(5)
    assert _hole_lengths(mesh) == [5, 5]
    assert mesh.maxwell_count == 10
    with pytest.raises(ValueError):
        cycle_annulus(2)


@pytest.mark.parametrize(
    "lb, lc",
    [(3, 3), (3, 4), (5, 6), (4, 4)],
)
def test_sphere_pants(lb, lc):
    mesh = sphere_pants(lb, lc)
    assert _hole_lengths(mesh) == sorted([lb + lc - 3, lb, lc])
    assert mesh.maxwell_count == 2 * (lb + lc) - 6
    assert _disjoint_holes(mesh)
    assert surface_invariants(mesh).reduced_genus == 0
    exits = [tuple(hole) for hole in mesh.meta["piece"]["exits"]]
    assert [mesh.hole_length(hole) for hole in exits] == [lb, lc]


def test_sphere_pants_rejects_short_legs():
    with pytest.raises(ValueError):
        sphere_pants(2, 5)


@pytest.mark.parametrize(
    "surface, delta, lengths",
    [
        ("sphere", 3, [3, 3]),
        ("sphere", 5, [5, 5]),
        ("projective", 3, [3, 6]),
        ("projective", 4, [4, 7]),
        ("torus", 3, [3, 9]),
        ("torus", 9, [9, 15]),
    ],
)
def test_piece_exit_length_law(surface, delta, lengths):
    mesh = piece(surface, delta)
    assert _hole_lengths(mesh) == lengths
    assert mesh.maxwell_count == 2 * delta
    assert _disjoint_holes(mesh)
    entrance = tuple(mesh.meta["piece"]["entrance"])
    (exit_hole,) = [tuple(hole) for hole in mesh.meta["piece"]["exits"]]
    assert mesh.hole_length(entrance) == delta
    assert mesh.hole_length(exit_hole) == delta + 6 * PieceKind(surface).reduced_genus


@pytest.mark.parametrize("surface", ["sphere", "projective", "torus"])
def test_piece_joins_onto_a_disc_tightly(surface):
    base = disc()
    (hole,) = base.holes
    other = piece(surface, 3)
    joined = join(base, hole, other, tuple(other.meta["piece"]["entrance"]))
    assert joined.maxwell_count == 6
    assert check_36(joined).status == TIGHT


def test_pants_join_onto_a_piece_exit():
    base = piece("sphere", 5)
    exit_hole = tuple(base.meta["piece"]["exits"][0])
    pants = sphere_pants(3, 5)
    joined = join(base, exit_hole, pants, tuple(pants.meta["piece"]["entrance"]))
    assert joined.maxwell_count == base.maxwell_count + pants.maxwell_count - 10


def test_piece_kind_validation():
    assert PieceKind("projective").reduced_genus == Fraction(1, 2)
    with pytest.raises(ValueError):
        PieceKind("klein")
    with pytest.raises(ValueError):
        piece("torus", 2)


def test_build_named_mesh():
    assert build_named_mesh("discus_mesh", {"r": 5}).maxwell_count == 6
    with pytest.raises(MoveError):
        build_named_mesh("teapot")
