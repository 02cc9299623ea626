"""Approximation-error metrics for decompositions.

Per-region symmetric Hausdorff error uses exact point-to-triangle distances
(KD-tree over triangle centroids prunes candidates); the sample-cloud error
visualization uses sample-to-sample KD-tree distances, whose error is
bounded by the sample spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .convex import ConvexPart, contains_points
from .errors import EmptyInput, EmptyMesh, NoSamplesInRegion
from .mesh import Aabb, TriangleMesh, combine_meshes, mesh_aabb, sample_surface
from .pipeline import Decomposition, RegionBox

INTERNAL_SLACK = 1e-9   # on-wall samples count as inside a neighboring part
DEFAULT_SAMPLES = 20000


# ---------------------------------------------------------------------------
# exact point-to-triangle distance

def _closest_point_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray,
                             c: np.ndarray) -> np.ndarray:
    """Min distance from each point to a common candidate triangle set.

    ``points`` is (N, 3); ``a``, ``b``, ``c`` are the (M, 3) triangle
    corners.  Returns (N,) minima.  Broadcasts to an (N, M) pair grid, so
    callers chunk N to bound memory.
    """
    p = points[:, None, :]
    ab = (b - a)[None, :, :]
    ac = (c - a)[None, :, :]
    ap = p - a[None, :, :]
    d1 = (ab * ap).sum(axis=2)
    d2 = (ac * ap).sum(axis=2)
    bp = p - b[None, :, :]
    d3 = (ab * bp).sum(axis=2)
    d4 = (ac * bp).sum(axis=2)
    cp = p - c[None, :, :]
    d5 = (ab * cp).sum(axis=2)
    d6 = (ac * cp).sum(axis=2)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v_face = np.where(denom != 0, vb / denom, 0.0)
        w_face = np.where(denom != 0, vc / denom, 0.0)
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        t_bc = np.where((d4 - d3) + (d5 - d6) != 0,
                        (d4 - d3) / ((d4 - d3) + (d5 - d6)), 0.0)

    # region selection per Ericson's closest-point-on-triangle
    v = np.clip(v_face, 0.0, 1.0)
    w = np.clip(w_face, 0.0, 1.0)
    closest = a[None] + v[..., None] * ab + w[..., None] * ac

    on_vert_a = (d1 <= 0) & (d2 <= 0)
    on_vert_b = (d3 >= 0) & (d4 <= d3)
    on_vert_c = (d6 >= 0) & (d5 <= d6)
    on_ab = (d1 >= 0) & (d3 <= 0) & (vc <= 0)
    on_ac = (d2 >= 0) & (d6 <= 0) & (vb <= 0)
    on_bc = ((d4 - d3) >= 0) & ((d5 - d6) >= 0) & (va <= 0)

    pt_ab = a[None] + np.clip(t_ab, 0, 1)[..., None] * ab
    pt_ac = a[None] + np.clip(t_ac, 0, 1)[..., None] * ac
    pt_bc = b[None] + np.clip(t_bc, 0, 1)[..., None] * (c - b)[None]

    closest = np.where(on_bc[..., None], pt_bc, closest)
    closest = np.where(on_ac[..., None], pt_ac, closest)
    closest = np.where(on_ab[..., None], pt_ab, closest)
    closest = np.where(on_vert_c[..., None], c[None] * np.ones_like(p), closest)
    closest = np.where(on_vert_b[..., None], b[None] * np.ones_like(p), closest)
    closest = np.where(on_vert_a[..., None], a[None] * np.ones_like(p), closest)

    return np.linalg.norm(p - closest, axis=2).min(axis=1)


class MeshDistanceIndex:
    """Exact nearest-surface distance queries against a triangle set.

    Small sets are brute-forced in chunks; larger sets prune candidates
    through a KD-tree over triangle centroids, then verify with an exact
    pass over every triangle that could still beat the best candidate.
    """

    BRUTE_LIMIT = 1024
    CHUNK_PAIRS = 2_000_000

    def __init__(self, triangles: np.ndarray):
        if len(triangles) == 0:
            raise EmptyMesh("distance index needs at least one triangle")
        self.a = triangles[:, 0].astype(float)
        self.b = triangles[:, 1].astype(float)
        self.c = triangles[:, 2].astype(float)
        self.centroids = (self.a + self.b + self.c) / 3.0
        self.radii = np.maximum.reduce([
            np.linalg.norm(self.a - self.centroids, axis=1),
            np.linalg.norm(self.b - self.centroids, axis=1),
            np.linalg.norm(self.c - self.centroids, axis=1),
        ])
        self.max_radius = float(self.radii.max())
        self.tree = cKDTree(self.centroids)

    @classmethod
    def from_mesh(cls, mesh: TriangleMesh) -> "MeshDistanceIndex":
        return cls(mesh.triangles)

    def distances(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n_tris = len(self.a)
        if n_tris <= self.BRUTE_LIMIT:
            return self._brute(points, np.arange(n_tris))
        k = min(8, n_tris)
        _, nearest = self.tree.query(points, k=k)
        nearest = np.atleast_2d(nearest)
        out = np.empty(len(points))
        for i, point in enumerate(points):
            cand = nearest[i]
            upper = float(self._brute(point[None], cand)[0])
            ball = self.tree.query_ball_point(point, upper + self.max_radius)
            out[i] = float(self._brute(point[None], np.asarray(ball, dtype=int))[0])
        return out

    def _brute(self, points: np.ndarray, tri_idx: np.ndarray) -> np.ndarray:
        m = max(len(tri_idx), 1)
        chunk = max(1, self.CHUNK_PAIRS // m)
        parts = []
        for start in range(0, len(points), chunk):
            sl = points[start:start + chunk]
            parts.append(_closest_point_distances(
                sl, self.a[tri_idx], self.b[tri_idx], self.c[tri_idx]))
        return np.concatenate(parts)


# ---------------------------------------------------------------------------
# decomposition surface handling

def _component_meshes(decomp: Decomposition) -> list[TriangleMesh]:
    return [p.to_mesh() for p in decomp.convex_parts] + [e.mesh for e in decomp.exact_meshes]


def _points_in_solid(mesh: TriangleMesh, points: np.ndarray,
                     slack: float) -> np.ndarray:
    """Boundary-inclusive containment of points in a watertight mesh.

    Points within ``slack`` of the surface count as inside; the rest are
    classified by ray-crossing parity along a direction chosen to avoid
    grazing the axis-aligned edges common in box-derived geometry.
    """
    inside = np.zeros(len(points), dtype=bool)
    if len(points) == 0:
        return inside
    tris = mesh.triangles
    inside = _closest_point_distances(
        points, tris[:, 0], tris[:, 1], tris[:, 2]) <= slack
    todo = np.nonzero(~inside)[0]
    if len(todo) == 0:
        return inside
    direction = np.array([0.531240312, 0.278932107, 0.800013734])
    direction /= np.linalg.norm(direction)
    a = tris[:, 0]
    e1 = tris[:, 1] - a
    e2 = tris[:, 2] - a
    h = np.cross(direction, e2)
    det = (e1 * h).sum(axis=1)
    scale = max(1.0, float(np.abs(mesh.vertices).max()))
    ok = np.abs(det) > 1e-14 * scale * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        s = points[todo, None, :] - a[None]                      # (N, M, 3)
        u = (s * h[None]).sum(axis=2) / det[None]
        q = np.cross(s, e1[None])
        v = (q @ direction) / det[None]
        t = (q * e2[None]).sum(axis=2) / det[None]
    hit = ok[None] & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0)
    inside[todo] = (hit.sum(axis=1) % 2).astype(bool)
    return inside


def _internal_point_mask(points: np.ndarray, own_index: int,
                         parts: list[ConvexPart],
                         exact_meshes: list[TriangleMesh]) -> np.ndarray:
    """True for points on internal walls of the union.

    A point belonging to sub-geometry ``own_index`` is internal when it
    lies inside (boundary included, slack ``INTERNAL_SLACK``) any *other*
    convex part or exact region sub-mesh.  The part lists are indexed with
    convex parts first, matching :func:`_component_meshes`.
    """
    mask = np.zeros(len(points), dtype=bool)
    for j, part in enumerate(parts):
        if j == own_index:
            continue
        mask |= contains_points(part, points, slack=INTERNAL_SLACK)
    for j, exact in enumerate(exact_meshes):
        if len(parts) + j == own_index:
            continue
        box = mesh_aabb(exact)
        cand = np.nonzero(box.contains_points(points, slack=INTERNAL_SLACK)
                          & ~mask)[0]
        if len(cand):
            mask[cand] = _points_in_solid(exact, points[cand], INTERNAL_SLACK)
    return mask


def _sample_union_surface(decomp: Decomposition, n: int, seed: int):
    """Area-proportional samples of the union surface, internal walls excluded."""
    meshes = _component_meshes(decomp)
    if not meshes:
        raise EmptyMesh("decomposition has no geometry")
    parts = decomp.convex_parts
    exact_meshes = [e.mesh for e in decomp.exact_meshes]
    areas = np.array([m.area() for m in meshes])
    total = areas.sum()
    if total <= 0:
        raise EmptyMesh("decomposition has zero surface area")
    counts = np.maximum(1, np.round(n * areas / total).astype(int))
    points = []
    for i, (mesh, count) in enumerate(zip(meshes, counts)):
        cloud = sample_surface(mesh, int(count), seed + i)
        internal = _internal_point_mask(cloud.points, i, parts, exact_meshes)
        points.append(cloud.points[~internal])
    return np.vstack(points)


def _double_wall_mask(mesh: TriangleMesh, points: np.ndarray,
                      source_face: np.ndarray) -> np.ndarray:
    """True for samples lying on coincident opposite-normal sheets of ``mesh``.

    A watertight mesh assembled from face-to-face touching components keeps
    both contact sheets; points on them are interior to the enclosed solid
    and are not part of its boundary.
    """
    mask = np.zeros(len(points), dtype=bool)
    if len(points) == 0:
        return mask
    tris = mesh.triangles
    normal = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    norms = np.linalg.norm(normal, axis=1)
    unit = normal / np.maximum(norms, 1e-300)[:, None]
    centroids = tris.mean(axis=1)
    radii = np.linalg.norm(tris - centroids[:, None, :], axis=2).max(axis=1)
    tree = cKDTree(centroids)
    scale = max(1.0, float(np.abs(mesh.vertices).max()))
    tol = 1e-9 * scale
    hits = tree.query_ball_point(points, r=float(radii.max()) + tol)
    for k, cand in enumerate(hits):
        cand = [g for g in cand if unit[g] @ unit[source_face[k]] < -0.5]
        if not cand:
            continue
        cand = np.asarray(cand)
        d = _closest_point_distances(points[k][None],
                                     tris[cand, 0], tris[cand, 1], tris[cand, 2])
        mask[k] = bool(d[0] <= tol)
    return mask


_REFINE_DEPTH = 6   # mixed-face subdivision levels in the external filter


def _refine_external(tris: np.ndarray, own_index: int,
                     parts: list[ConvexPart],
                     exact_meshes: list[TriangleMesh]) -> np.ndarray:
    """External subset of one component's triangles, refined at walls.

    A triangle is classified at its three corners and centroid: all
    internal drops it, all external keeps it, and a mixed triangle is
    subdivided at its edge midpoints so large faces that straddle a
    face-to-face contact keep their truly external area.
    """
    kept = []
    queue = tris
    for _ in range(_REFINE_DEPTH):
        if len(queue) == 0:
            break
        probes = np.concatenate([queue[:, 0], queue[:, 1], queue[:, 2],
                                 queue.mean(axis=1)])
        internal = _internal_point_mask(probes, own_index, parts,
                                        exact_meshes).reshape(4, -1)
        mixed = internal.any(axis=0) & ~internal.all(axis=0)
        kept.append(queue[~internal.any(axis=0)])
        sub = queue[mixed]
        a, b, c = sub[:, 0], sub[:, 1], sub[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        queue = np.concatenate([
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]) if len(sub) else sub
    if len(queue):
        internal = _internal_point_mask(queue.mean(axis=1), own_index, parts,
                                        exact_meshes)
        kept.append(queue[~internal])
    kept = [k for k in kept if len(k)]
    return np.concatenate(kept, axis=0) if kept else tris[:0]


def _external_faces(decomp: Decomposition) -> np.ndarray:
    """Triangles of the union surface with internal-wall faces removed.

    A face is treated as internal when it lies on or inside another
    sub-geometry; faces shared by two parts are walls of both.  Faces that
    are only partially internal are subdivided so just the wall area is
    removed.
    """
    meshes = _component_meshes(decomp)
    parts = decomp.convex_parts
    exact_meshes = [e.mesh for e in decomp.exact_meshes]
    kept = []
    for i, mesh in enumerate(meshes):
        tris = mesh.triangles
        if len(tris) == 0:
            continue
        kept.append(_refine_external(tris, i, parts, exact_meshes))
    tris = np.concatenate([t for t in kept if len(t)], axis=0) if kept else np.empty((0, 3, 3))
    if len(tris) == 0:
        raise EmptyMesh("decomposition surface is entirely internal")
    return tris


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class RegionError:
    region_id: str
    d_a_to_o: float
    d_o_to_a: float

    @property
    def region_error(self) -> float:
        return max(self.d_a_to_o, self.d_o_to_a)


@dataclass(frozen=True)
class RegionErrorReport:
    regions: tuple[RegionError, ...]

    @property
    def overall(self) -> float:
        return overall_error([r.region_error for r in self.regions])

    def to_dict(self) -> dict:
        return {
            "regions": [
                {
                    "region_id": r.region_id,
                    "d_a_to_o": r.d_a_to_o,
                    "d_o_to_a": r.d_o_to_a,
                    "region_error": r.region_error,
                }
                for r in self.regions
            ],
            "overall": self.overall,
        }


def region_hausdorff(original: TriangleMesh, approx: Decomposition,
                     region: RegionBox, n: int = DEFAULT_SAMPLES,
                     seed: int = 0) -> tuple[float, float]:
    """Directional Hausdorff estimates for one region, both directions.

    ``d_a_to_o``: max over approximation-surface samples inside the region
    box of the exact distance to the original mesh.  ``d_o_to_a``: max over
    original-surface samples inside the box of the exact distance to the
    approximation's external surface.  Samples on internal walls of the
    union are excluded, as are original samples on coincident opposite
    sheets where touching components meet face-to-face.
    """
    approx_points = _sample_union_surface(approx, n, seed)
    in_region = region.box.contains_points(approx_points)
    approx_points = approx_points[in_region]

    orig_cloud = sample_surface(original, n, seed + 101)
    in_box = region.box.contains_points(orig_cloud.points)
    orig_points = orig_cloud.points[in_box]
    # samples on coincident opposite sheets (face-to-face component contacts)
    # are interior to the original solid, not boundary
    double = _double_wall_mask(original, orig_points,
                               orig_cloud.source_face[in_box])
    orig_points = orig_points[~double]

    if len(approx_points) == 0 and len(orig_points) == 0:
        raise NoSamplesInRegion(f"region {region.id!r} contains no surface")

    d_a_to_o = 0.0
    if len(approx_points):
        original_index = MeshDistanceIndex.from_mesh(original)
        d_a_to_o = float(original_index.distances(approx_points).max())
    d_o_to_a = 0.0
    if len(orig_points):
        approx_index = MeshDistanceIndex(_external_faces(approx))
        d_o_to_a = float(approx_index.distances(orig_points).max())
    return d_a_to_o, d_o_to_a


def evaluate_decomposition(original: TriangleMesh, approx: Decomposition,
                           regions: list[RegionBox], n: int = DEFAULT_SAMPLES,
                           seed: int = 0) -> RegionErrorReport:
    """Per-region symmetric Hausdorff report across all regions."""
    if not regions:
        raise EmptyInput("at least one region is required")
    entries = []
    for region in regions:
        d_ao, d_oa = region_hausdorff(original, approx, region, n=n, seed=seed)
        entries.append(RegionError(region.id, d_ao, d_oa))
    return RegionErrorReport(regions=tuple(entries))


def overall_error(region_errors) -> float:
    """Arithmetic mean of per-region errors."""
    values = [float(v) for v in region_errors]
    if not values:
        raise EmptyInput("no region errors to average")
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# sample-cloud error visualization

def white_red_colormap(normalized: np.ndarray) -> np.ndarray:
    """Linear white (low) to red (high); returns (N, 3) floats in [0, 1]."""
    t = np.clip(np.asarray(normalized, dtype=float), 0.0, 1.0)
    colors = np.ones((len(t), 3))
    colors[:, 1] = 1.0 - t
    colors[:, 2] = 1.0 - t
    return colors


@dataclass(frozen=True)
class ErrorSampleSet:
    points: np.ndarray
    distances: np.ndarray
    normalized: np.ndarray
    colors: np.ndarray
    alpha: float
    beta: float

    def to_dict(self) -> dict:
        rgb = np.clip(np.round(self.colors * 255), 0, 255).astype(int)
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "points": self.points.tolist(),
            "distances": self.distances.tolist(),
            "normalized": self.normalized.tolist(),
            "colors": [f"#{r:02x}{g:02x}{b:02x}" for r, g, b in rgb],
        }

    def to_ply(self) -> str:
        rgb = np.clip(np.round(self.colors * 255), 0, 255).astype(int)
        lines = [
            "ply", "format ascii 1.0",
            f"element vertex {len(self.points)}",
            "property float x", "property float y", "property float z",
            "property uchar red", "property uchar green", "property uchar blue",
            "end_header",
        ]
        for p, c in zip(self.points, rgb):
            lines.append(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g} {c[0]} {c[1]} {c[2]}")
        return "\n".join(lines) + "\n"


def error_samples(original: TriangleMesh, parts: list[ConvexPart],
                  n: int = DEFAULT_SAMPLES, colormap=white_red_colormap,
                  alpha: float = 0.0, beta: float | None = None,
                  filter_boxes: list[Aabb] = (), on_approx: bool = True,
                  seed: int = 0) -> ErrorSampleSet:
    """Colored sample cloud of approximation error, KD-tree backed.

    With ``on_approx`` the approximation union is sampled and measured
    against samples of the original; otherwise the directions mirror and,
    when ``filter_boxes`` is non-empty, the output samples are restricted
    to those boxes.
    """
    if len(original.faces) == 0:
        raise EmptyMesh("original mesh is empty")
    if not parts:
        raise EmptyMesh("approximation has no parts")
    decomp = Decomposition(convex_parts=list(parts), exact_meshes=[], stats=None)

    approx_points = _sample_union_surface(decomp, n, seed)
    orig_points = sample_surface(original, n, seed + 101).points

    if on_approx:
        query, target = approx_points, orig_points
    else:
        query, target = orig_points, approx_points
        if len(filter_boxes):
            keep = np.zeros(len(query), dtype=bool)
            for box in filter_boxes:
                keep |= box.contains_points(query)
            query = query[keep]
    tree = cKDTree(target)
    distances, _ = tree.query(query)
    distances = np.asarray(distances, dtype=float)

    if beta is None:
        beta = float(distances.max()) if len(distances) else 1.0
    span = beta - alpha
    if span <= 0:
        normalized = np.zeros_like(distances)
    else:
        normalized = np.clip((distances - alpha) / span, 0.0, 1.0)
    return ErrorSampleSet(
        points=query, distances=distances, normalized=normalized,
        colors=colormap(normalized), alpha=float(alpha), beta=float(beta),
    )


# ---------------------------------------------------------------------------
# objective report

@dataclass(frozen=True)
class ObjectiveReport:
    lambda_err: float
    lambda_sim: float
    per_region_phi: dict[str, float]
    per_region_delta: dict[str, float]
    xi: float
    tau: float

    @property
    def weighted_total(self) -> float:
        return self.lambda_err * self.xi + self.lambda_sim * self.tau

    def to_dict(self) -> dict:
        return {
            "lambda_err": self.lambda_err,
            "lambda_sim": self.lambda_sim,
            "per_region_phi": dict(self.per_region_phi),
            "per_region_delta": dict(self.per_region_delta),
            "xi": self.xi,
            "tau": self.tau,
            "weighted_total": self.weighted_total,
        }


def objective_report(error_report: RegionErrorReport, regions: list[RegionBox],
                     lambda_err: float = 1.0, lambda_sim: float = 0.0,
                     perf=None) -> ObjectiveReport:
    """Weighted error/performance objective, reported (never optimized).

    ``phi`` per region is its symmetric Hausdorff error, ``delta`` its
    tolerance; ``xi`` sums squared deviations and ``tau`` is the
    performance proxy from a :class:`~regionacd.bench.PerfReport`.
    """
    if lambda_err < 0 or lambda_sim < 0:
        raise ValueError("objective weights must be non-negative")
    deltas = {r.id: r.tolerance for r in regions}
    phis = {e.region_id: e.region_error for e in error_report.regions}
    xi = float(sum(
        (phis[rid] - deltas.get(rid, 0.0)) ** 2 for rid in phis
    ))
    tau = float(getattr(perf, "proxy_rtf", 0.0) or 0.0) if perf is not None else 0.0
    return ObjectiveReport(
        lambda_err=float(lambda_err), lambda_sim=float(lambda_sim),
        per_region_phi=phis, per_region_delta={rid: deltas.get(rid, 0.0) for rid in phis},
        xi=xi, tau=tau,
    )
