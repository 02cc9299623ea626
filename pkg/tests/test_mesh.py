"""Mesh core: construction, validation, volumes, sampling and file I/O."""

import numpy as np
import pytest

from regionacd import (
    Aabb,
    EmptyMesh,
    NotWatertight,
    ParseError,
    TriangleMesh,
    load_mesh,
    mesh_aabb,
    mesh_volume,
    sample_surface,
    save_mesh,
    validate,
)
from regionacd import fixtures as F
from regionacd.mesh import combine_meshes, weld_vertices


# ---------------------------------------------------------------------------
# Aabb

def test_aabb_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Aabb((0, 0, 0), (-1, 1, 1))


def test_aabb_volume_diagonal_center():
    box = Aabb((0, 0, 0), (1, 2, 3))
    assert box.volume == pytest.approx(6.0)
    assert box.diagonal == pytest.approx(np.sqrt(14.0))
    assert np.allclose(box.center, [0.5, 1.0, 1.5])


def test_aabb_contains_points_with_slack():
    box = Aabb((0, 0, 0), (1, 1, 1))
    pts = np.array([[0.5, 0.5, 0.5], [1.0 + 1e-7, 0.5, 0.5], [2, 2, 2]])
    assert list(box.contains_points(pts)) == [True, False, False]
    assert list(box.contains_points(pts, slack=1e-6)) == [True, True, False]
    # negative slack shrinks the box: boundary points fall out
    assert not box.contains_points(np.array([[0.0, 0.5, 0.5]]), slack=-1e-9)[0]


def test_aabb_overlap_vs_interior_overlap():
    a = Aabb((0, 0, 0), (1, 1, 1))
    b = Aabb((1, 0, 0), (2, 1, 1))   # shares a face with a
    c = Aabb((0.5, 0, 0), (2, 1, 1))
    assert a.overlaps(b)
    assert not a.interior_overlaps(b)
    assert a.interior_overlaps(c)


# ---------------------------------------------------------------------------
# TriangleMesh and validation

def test_face_index_out_of_range_raises():
    with pytest.raises(ParseError):
        TriangleMesh(np.zeros((3, 3)), [[0, 1, 3]])


def test_cube_is_watertight_and_validates():
    cube = F.box_mesh()
    report = validate(cube)
    assert report.ok
    assert report.watertight
    assert report.n_boundary_edges == 0
    assert report.n_nonmanifold_edges == 0
    assert not report.degenerate_faces


def test_open_mesh_reports_boundary_edges():
    cube = F.box_mesh()
    holed = TriangleMesh(cube.vertices, cube.faces[:-1])   # drop one face
    report = validate(holed)
    assert not report.watertight
    assert report.n_boundary_edges == 3


def test_inconsistent_winding_is_nonmanifold():
    cube = F.box_mesh()
    faces = cube.faces.copy()
    faces[0] = faces[0][::-1]   # flip one face: its edges repeat same-direction
    report = validate(TriangleMesh(cube.vertices, faces))
    assert not report.watertight
    assert report.n_nonmanifold_edges > 0


def test_all_fixtures_watertight():
    for make in (F.box_mesh, F.l_prism, F.dimpled_cube, F.dumbbell,
                 F.square_torus, F.shell_with_cavity, F.motor_like,
                 lambda: F.icosphere(2)):
        mesh = make()
        assert mesh.watertight, make


# ---------------------------------------------------------------------------
# volume oracles (all analytic)

def test_volume_oracles():
    assert mesh_volume(F.box_mesh((0, 0, 0), (1, 2, 3))) == pytest.approx(6.0)
    assert mesh_volume(F.l_prism()) == pytest.approx(3.0)
    # dimple: square pyramid, base 0.5 x 0.5, depth 0.2
    assert mesh_volume(F.dimpled_cube()) == pytest.approx(1.0 - 0.25 * 0.2 / 3.0)
    # dumbbell: two unit cubes plus 1 x 0.2 x 1 neck
    assert mesh_volume(F.dumbbell()) == pytest.approx(2.2)
    # torus: (2*2 - 1*1) footprint extruded to height 0.5
    assert mesh_volume(F.square_torus()) == pytest.approx(1.5)
    # shell: unit cube minus 0.5^3 cavity
    assert mesh_volume(F.shell_with_cavity()) == pytest.approx(1.0 - 0.125)


def test_volume_requires_watertight():
    cube = F.box_mesh()
    with pytest.raises(NotWatertight):
        mesh_volume(TriangleMesh(cube.vertices, cube.faces[:-1]))


def test_icosphere_volume_approaches_sphere():
    vol = mesh_volume(F.icosphere(3, radius=1.0))
    exact = 4.0 / 3.0 * np.pi
    assert 0.99 * exact < vol < exact   # inscribed polyhedron, from below


def test_mesh_aabb():
    box = mesh_aabb(F.box_mesh((-1, 0, 2), (3, 4, 5)))
    assert np.allclose(box.min, [-1, 0, 2])
    assert np.allclose(box.max, [3, 4, 5])


# ---------------------------------------------------------------------------
# surface sampling

def test_sample_surface_deterministic_and_on_surface():
    cube = F.box_mesh()
    a = sample_surface(cube, 1000, seed=7)
    b = sample_surface(cube, 1000, seed=7)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.source_face, b.source_face)
    # every sample lies on a cube face: one coordinate is 0 or 1
    on_face = np.isclose(a.points, 0.0) | np.isclose(a.points, 1.0)
    assert np.all(on_face.any(axis=1))


def test_sample_surface_area_uniform_binomial_bound():
    """Face-hit counts stay within 3 sigma of the area-proportional mean."""
    cube = F.box_mesh((0, 0, 0), (1, 1, 2))   # side areas 2, top/bottom 1
    n = 20000
    cloud = sample_surface(cube, n, seed=3)
    areas = cube.face_areas()
    total = areas.sum()
    counts = np.bincount(cloud.source_face, minlength=len(areas))
    p = areas / total
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3.0 * sigma + 1.0)


def test_sample_surface_rejects_empty():
    empty = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3)))
    with pytest.raises(EmptyMesh):
        sample_surface(empty, 10, seed=0)


# ---------------------------------------------------------------------------
# welding and combining

def test_weld_vertices_merges_duplicates():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0]], dtype=float)
    f = np.array([[0, 1, 2], [0, 3, 2]])
    wv, wf = weld_vertices(v, f)
    assert len(wv) == 3
    assert np.array_equal(wf[0], wf[1])


def test_weld_vertices_respects_tolerance():
    v = np.array([[0, 0, 0], [1e-12, 0, 0], [1e-3, 0, 0]])
    wv, _ = weld_vertices(v, np.zeros((0, 3), dtype=np.int64), tol=1e-9)
    assert len(wv) == 2


def test_combine_meshes_offsets_indices():
    a = F.box_mesh((0, 0, 0), (1, 1, 1))
    b = F.box_mesh((2, 0, 0), (3, 1, 1))
    both = combine_meshes([a, b])
    assert len(both.vertices) == 16
    assert len(both.faces) == 24
    assert mesh_volume(both) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# file I/O

def test_obj_round_trip(tmp_path):
    mesh = F.l_prism()
    path = tmp_path / "l.obj"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)


def test_stl_round_trip_volume(tmp_path):
    mesh = F.dimpled_cube()
    path = tmp_path / "d.stl"
    save_mesh(mesh, path)
    back = load_mesh(path)   # binary STL is welded on load
    assert back.watertight
    assert mesh_volume(back) == pytest.approx(mesh_volume(mesh), abs=1e-6)


def test_obj_polygon_faces_fan_triangulated(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text(
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "v 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
        "f 1 3 2\nf 1 4 3\nf 5 6 7 8\n"       # one quad face
        "f 1 2 6\nf 1 6 5\nf 3 4 8\nf 3 8 7\n"
        "f 2 3 7\nf 2 7 6\nf 4 1 5\nf 4 5 8\n"
    )
    mesh = load_mesh(path)
    assert len(mesh.faces) == 12
    assert mesh_volume(mesh) == pytest.approx(1.0)


def test_obj_negative_indices(tmp_path):
    path = tmp_path / "neg.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    mesh = load_mesh(path, force=True)
    assert np.array_equal(mesh.faces, [[0, 1, 2]])


def test_load_rejects_open_mesh_without_force(tmp_path):
    path = tmp_path / "open.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    with pytest.raises(NotWatertight):
        load_mesh(path)
    assert len(load_mesh(path, force=True).faces) == 1


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0\nf 1 2 3\n")
    with pytest.raises(ParseError):
        load_mesh(bad)
    unknown = tmp_path / "mesh.xyz"
    unknown.write_text("whatever")
    with pytest.raises(ParseError):
        load_mesh(unknown)
