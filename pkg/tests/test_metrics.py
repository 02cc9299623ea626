"""Metrics: exact point-to-triangle distances, per-region Hausdorff error,
error sample clouds and the objective report."""

import numpy as np
import pytest

from regionacd import (
    Aabb,
    Decomposition,
    EmptyInput,
    MeshDistanceIndex,
    NoSamplesInRegion,
    RegionBox,
    convex_hull,
    error_samples,
    evaluate_decomposition,
    objective_report,
    overall_error,
    region_hausdorff,
)
from regionacd import fixtures as F
from regionacd.metrics import white_red_colormap
from regionacd.pipeline import DecompositionStats, ExactRegionMesh


def as_decomp(parts, exact=()):
    return Decomposition(convex_parts=list(parts), exact_meshes=list(exact),
                         stats=DecompositionStats())


def hull_of(mesh):
    return convex_hull(mesh.vertices, source_mesh=mesh)


# ---------------------------------------------------------------------------
# MeshDistanceIndex

def test_distance_to_single_triangle_regions():
    """Face, edge and vertex regions of the point-to-triangle distance."""
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]], dtype=float)
    index = MeshDistanceIndex(tri)
    queries = np.array([
        [0.25, 0.25, 1.0],    # above the face
        [0.5, -2.0, 0.0],     # beside edge ab
        [-3.0, -4.0, 0.0],    # beyond vertex a
        [2.0, 2.0, 0.0],      # beyond edge bc
        [0.25, 0.25, 0.0],    # on the face
    ])
    expected = [1.0, 2.0, 5.0, np.sqrt(2.0) * 1.5, 0.0]
    assert np.allclose(index.distances(queries), expected, atol=1e-12)


def test_distance_index_cube_surface():
    cube = F.box_mesh()
    index = MeshDistanceIndex.from_mesh(cube)
    queries = np.array([
        [0.5, 0.5, 0.5],    # center: 0.5 to every face
        [0.5, 0.5, 2.0],    # above the top
        [2.0, 2.0, 2.0],    # off the corner
        [1.0, 1.0, 1.0],    # on a corner
    ])
    expected = [0.5, 1.0, np.sqrt(3.0), 0.0]
    assert np.allclose(index.distances(queries), expected, atol=1e-12)


def test_distance_index_kd_matches_brute():
    """The KD-pruned path (above BRUTE_LIMIT triangles) agrees with brute
    force exactly."""
    sphere = F.icosphere(4)   # 5120 faces > BRUTE_LIMIT
    assert len(sphere.faces) > MeshDistanceIndex.BRUTE_LIMIT
    index = MeshDistanceIndex.from_mesh(sphere)
    rng = np.random.default_rng(3)
    queries = rng.uniform(-2, 2, size=(64, 3))
    pruned = index.distances(queries)
    brute = index._brute(queries, np.arange(len(sphere.faces)))
    assert np.allclose(pruned, brute, atol=1e-12)
    # and both are near the analytic distance-to-unit-sphere
    analytic = np.abs(np.linalg.norm(queries, axis=1) - 1.0)
    assert np.allclose(pruned, analytic, atol=5e-3)


# ---------------------------------------------------------------------------
# region_hausdorff

def test_hausdorff_cube_vs_own_hull_is_zero():
    cube = F.box_mesh()
    decomp = as_decomp([hull_of(cube)])
    region = RegionBox("all", Aabb((0, 0, 0), (1, 1, 1)), 0.0)
    d_ao, d_oa = region_hausdorff(cube, decomp, region, n=4000, seed=0)
    assert d_ao <= 1e-9
    assert d_oa <= 1e-9


def test_hausdorff_dimple_cavity_region():
    """Hulling away the dimple: original cavity walls sit up to the dimple
    depth 0.2 from the flat hull top; the hull adds no surface inside a
    cavity-only region, so the approx-to-original direction stays zero."""
    mesh = F.dimpled_cube(depth=0.2)
    decomp = as_decomp([hull_of(mesh)])   # hull == plain unit cube
    cavity = RegionBox("cavity", Aabb((0.25, 0.25, 0.7), (0.75, 0.75, 1.0 - 1e-6)), 0.2)
    d_ao, d_oa = region_hausdorff(mesh, decomp, cavity, n=20000, seed=0)
    assert d_ao <= 1e-9
    assert 0.17 <= d_oa <= 0.2 + 1e-9   # sampled max approaches the apex depth


def test_hausdorff_internal_walls_excluded():
    """Two half-cube parts: their shared wall at x=0.5 must not count as
    approximation surface, so the decomposition still has zero error."""
    cube = F.box_mesh()
    left = hull_of(F.box_mesh((0, 0, 0), (0.5, 1, 1)))
    right = hull_of(F.box_mesh((0.5, 0, 0), (1, 1, 1)))
    decomp = as_decomp([left, right])
    region = RegionBox("all", Aabb((0, 0, 0), (1, 1, 1)), 0.0)
    d_ao, d_oa = region_hausdorff(cube, decomp, region, n=8000, seed=0)
    assert d_ao <= 1e-9
    assert d_oa <= 1e-9


def test_hausdorff_inflated_parts_measure_overshoot():
    """An approximation 0.05 larger on every side: the face centers sit at
    distance 0.05 and the corners at 0.05 * sqrt(3)."""
    cube = F.box_mesh()
    inflated = hull_of(F.box_mesh((-0.05, -0.05, -0.05), (1.05, 1.05, 1.05)))
    region = RegionBox("all", Aabb((-1, -1, -1), (2, 2, 2)), 0.1)
    d_ao, d_oa = region_hausdorff(cube, as_decomp([inflated]), region,
                                  n=20000, seed=0)
    corner = 0.05 * np.sqrt(3.0)
    assert 0.05 - 1e-9 <= d_ao <= corner + 1e-9
    assert d_oa == pytest.approx(0.05, abs=1e-3)


def test_hausdorff_region_without_surface_raises():
    cube = F.box_mesh()
    decomp = as_decomp([hull_of(cube)])
    region = RegionBox("hole", Aabb((0.4, 0.4, 0.4), (0.6, 0.6, 0.6)), 0.1)
    with pytest.raises(NoSamplesInRegion):
        region_hausdorff(cube, decomp, region, n=2000, seed=0)


def test_evaluate_decomposition_report():
    cube = F.box_mesh()
    decomp = as_decomp([hull_of(cube)])
    regions = [
        RegionBox("lo", Aabb((0, 0, 0), (1, 1, 0.5)), 0.0),
        RegionBox("hi", Aabb((0, 0, 0.5), (1, 1, 1)), 0.0),
    ]
    report = evaluate_decomposition(cube, decomp, regions, n=4000, seed=0)
    assert [r.region_id for r in report.regions] == ["lo", "hi"]
    assert report.overall <= 1e-9
    payload = report.to_dict()
    assert set(payload) == {"regions", "overall"}
    assert set(payload["regions"][0]) == {
        "region_id", "d_a_to_o", "d_o_to_a", "region_error"}


def test_evaluate_requires_regions():
    cube = F.box_mesh()
    with pytest.raises(EmptyInput):
        evaluate_decomposition(cube, as_decomp([hull_of(cube)]), [])


def test_overall_error_mean_and_empty():
    assert overall_error([0.1, 0.3]) == pytest.approx(0.2)
    with pytest.raises(EmptyInput):
        overall_error([])


def test_exact_region_mesh_contributes_surface():
    cube = F.box_mesh()
    left = ExactRegionMesh("left", F.box_mesh((0, 0, 0), (0.5, 1, 1)))
    right = hull_of(F.box_mesh((0.5, 0, 0), (1, 1, 1)))
    decomp = as_decomp([right], [left])
    region = RegionBox("all", Aabb((0, 0, 0), (1, 1, 1)), 0.0)
    d_ao, d_oa = region_hausdorff(cube, decomp, region, n=8000, seed=0)
    assert max(d_ao, d_oa) <= 1e-9


# ---------------------------------------------------------------------------
# error sample cloud

def test_white_red_colormap_endpoints():
    colors = white_red_colormap(np.array([0.0, 0.5, 1.0]))
    assert np.allclose(colors[0], [1, 1, 1])
    assert np.allclose(colors[1], [1, 0.5, 0.5])
    assert np.allclose(colors[2], [1, 0, 0])


def test_error_samples_on_approx_dimple():
    mesh = F.dimpled_cube(depth=0.2)
    cloud = error_samples(mesh, [hull_of(mesh)], n=20000, seed=0)
    spacing = np.sqrt(mesh.area() / 20000)
    # approx surface (the hull) caps the cavity: max error ~ dimple depth
    assert cloud.distances.max() == pytest.approx(0.2, abs=3 * spacing)
    assert cloud.beta == pytest.approx(float(cloud.distances.max()))
    # normalization arithmetic is exactly clip((d - alpha) / (beta - alpha))
    expected = np.clip((cloud.distances - cloud.alpha)
                       / (cloud.beta - cloud.alpha), 0.0, 1.0)
    assert np.array_equal(cloud.normalized, expected)
    assert np.array_equal(cloud.colors, white_red_colormap(expected))


def test_error_samples_filter_boxes_original_direction():
    mesh = F.dimpled_cube(depth=0.2)
    cavity = Aabb((0.25, 0.25, 0.7), (0.75, 0.75, 1.0 - 1e-6))
    cloud = error_samples(mesh, [hull_of(mesh)], n=20000, seed=0,
                          on_approx=False, filter_boxes=[cavity])
    assert len(cloud.points) > 100
    assert np.all(cavity.contains_points(cloud.points))
    # every retained sample is a cavity-wall point: all clearly off the hull
    assert cloud.distances.min() > 0.0


def test_error_samples_alpha_beta_clamp():
    mesh = F.dimpled_cube()
    cloud = error_samples(mesh, [hull_of(mesh)], n=5000, seed=0,
                          alpha=0.05, beta=0.1)
    assert cloud.alpha == 0.05 and cloud.beta == 0.1
    assert cloud.normalized.min() == 0.0
    assert cloud.normalized.max() == 1.0   # dimple errors exceed beta -> clamped


def test_error_sample_set_serialization():
    mesh = F.box_mesh()
    cloud = error_samples(mesh, [hull_of(mesh)], n=100, seed=0)
    payload = cloud.to_dict()
    assert len(payload["colors"]) == len(cloud.points)
    assert all(c.startswith("#") and len(c) == 7 for c in payload["colors"])
    ply = cloud.to_ply()
    assert ply.startswith("ply\nformat ascii 1.0")
    assert f"element vertex {len(cloud.points)}" in ply


# ---------------------------------------------------------------------------
# objective report

def test_objective_report_arithmetic():
    from regionacd.metrics import RegionError, RegionErrorReport

    report = RegionErrorReport(regions=(
        RegionError("a", 0.02, 0.01),    # region_error 0.02, delta 0.01
        RegionError("b", 0.0, 0.05),     # region_error 0.05, delta 0.05
    ))
    regions = [
        RegionBox("a", Aabb((0, 0, 0), (1, 1, 1)), 0.01),
        RegionBox("b", Aabb((2, 0, 0), (3, 1, 1)), 0.05),
    ]
    obj = objective_report(report, regions, lambda_err=2.0, lambda_sim=3.0)
    assert obj.xi == pytest.approx(0.01 ** 2)
    assert obj.tau == 0.0
    assert obj.weighted_total == pytest.approx(2.0 * 0.01 ** 2)
    with pytest.raises(ValueError):
        objective_report(report, regions, lambda_err=-1.0)
