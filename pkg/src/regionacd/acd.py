"""Tolerance-driven approximate convex decomposition by recursive plane splits.

Concavity of a piece is the largest distance from its surface samples to the
surface of its own convex hull.  The worst piece is repeatedly split by the
best axis-aligned candidate plane until every piece meets the tolerance or
the part budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolean import clip_mesh_by_plane, simplify_coplanar_patches
from .convex import ConvexPart, Plane, convex_hull
from .errors import CapFailure, DegenerateInput, NoValidPlane
from .mesh import TriangleMesh, mesh_aabb, mesh_volume, sample_surface

SCORING_SAMPLES = 512     # cheap, noisy evaluation while ranking planes
FINAL_SAMPLES = 8192      # acceptance evaluation of each piece


@dataclass(frozen=True)
class AcdParams:
    tolerance: float
    max_parts: int = 4096
    candidate_planes_per_axis: int = 8
    min_part_volume_fraction: float = 1e-6

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.max_parts < 1:
            raise ValueError("max_parts must be >= 1")


@dataclass(frozen=True)
class ConcavityMeasure:
    value: float
    witness_point: np.ndarray


def concavity(mesh: TriangleMesh, n_samples: int = FINAL_SAMPLES,
              seed: int = 0) -> ConcavityMeasure:
    """Max distance from surface samples to the hull surface; 0 when convex.

    For points inside a convex polytope the distance to its boundary equals
    the smallest distance to any face plane, so the per-sample evaluation is
    exact (no sampling of the hull itself).
    """
    hull = convex_hull(mesh.vertices)
    cloud = sample_surface(mesh, n_samples, seed)
    planes = hull.planes
    depth = planes[:, 3] - cloud.points @ planes[:, :3].T  # >= 0 inside
    per_sample = np.clip(depth.min(axis=1), 0.0, None)
    best = int(np.argmax(per_sample))
    return ConcavityMeasure(value=float(per_sample[best]),
                            witness_point=cloud.points[best].copy())


def _candidate_planes(mesh: TriangleMesh, params: AcdParams,
                      witness: np.ndarray) -> list[tuple[int, float]]:
    aabb = mesh_aabb(mesh)
    candidates: list[tuple[int, float]] = []
    k = params.candidate_planes_per_axis
    for axis in range(3):
        lo, hi = aabb.min[axis], aabb.max[axis]
        if hi - lo < 1e-12:
            continue
        for i in range(k):
            candidates.append((axis, lo + (hi - lo) * (i + 1) / (k + 1)))
        w = float(witness[axis])
        if lo + 1e-12 < w < hi - 1e-12:
            candidates.append((axis, w))
    return candidates


TOP_EXACT = 3     # candidate planes clipped exactly after the proxy ranking


def _cloud_concavity(pts: np.ndarray) -> float:
    """Max distance from a point cloud to its own hull surface (proxy)."""
    from scipy.spatial import ConvexHull, QhullError

    if len(pts) < 8:
        return np.inf
    try:
        eqs = ConvexHull(pts).equations
    except QhullError:
        return np.inf
    depth = -(pts @ eqs[:, :3].T + eqs[:, 3])   # >= 0 inside
    return float(np.clip(depth.min(axis=1), 0.0, None).max())


def _ranked_candidates(mesh: TriangleMesh, params: AcdParams, seed: int):
    """Candidate planes ordered by a cheap sample-cloud concavity proxy.

    The proxy splits the scoring sample cloud by the plane and sums the
    cloud-to-own-hull concavities of the two halves; exact clipping is then
    only spent on the most promising planes.
    """
    measure = concavity(mesh, SCORING_SAMPLES, seed)
    cloud = sample_surface(mesh, SCORING_SAMPLES, seed)
    scored = []
    for axis, offset in _candidate_planes(mesh, params, measure.witness_point):
        side = cloud.points[:, axis] <= offset
        proxy = (_cloud_concavity(cloud.points[side])
                 + _cloud_concavity(cloud.points[~side]))
        scored.append((proxy, axis, offset))
    scored.sort()
    return scored


def _best_split(mesh: TriangleMesh, params: AcdParams, seed: int):
    best = None
    best_score = np.inf
    exact_evals = 0
    for _, axis, offset in _ranked_candidates(mesh, params, seed):
        if best is not None and exact_evals >= TOP_EXACT:
            break
        plane = Plane.axis(axis, offset)
        try:
            inside = clip_mesh_by_plane(mesh, plane, "inside")
            outside = clip_mesh_by_plane(mesh, plane, "outside")
        except CapFailure:
            continue
        if inside is None or outside is None or inside is mesh or outside is mesh:
            continue
        try:
            phi_in = concavity(inside, SCORING_SAMPLES, seed + 1).value
            phi_out = concavity(outside, SCORING_SAMPLES, seed + 2).value
        except DegenerateInput:
            continue
        exact_evals += 1
        score = phi_in + phi_out
        if score < best_score - 1e-15:
            best_score = score
            best = (plane, inside, outside)
    if best is None:
        raise NoValidPlane("every candidate plane produced a degenerate child")
    return best


def pick_split_plane(mesh: TriangleMesh, params: AcdParams, seed: int = 0) -> Plane:
    """Best axis-aligned splitting plane by summed child concavities."""
    plane, _, _ = _best_split(mesh, params, seed)
    return plane


class DecomposeResult(list):
    """List of :class:`ConvexPart` with a budget-exhaustion warning flag."""

    budget_exhausted: bool = False


def convex_decompose(mesh: TriangleMesh, params: AcdParams,
                     seed: int = 0) -> DecomposeResult:
    """Decompose a watertight mesh into convex parts meeting the tolerance.

    Every returned part is the hull of a sub-mesh whose concavity is at most
    ``params.tolerance`` (unless the budget ran out, which sets the
    ``budget_exhausted`` flag on the result).
    """
    if params.tolerance <= 0:
        raise ValueError("tolerance must be > 0 (zero-tolerance regions bypass "
                         "decomposition upstream)")
    total_volume = abs(mesh_volume(mesh))
    min_volume = params.min_part_volume_fraction * total_volume

    open_pieces: list[tuple[float, int, TriangleMesh]] = []
    closed: list[TriangleMesh] = []
    counter = 0

    def admit(piece: TriangleMesh):
        nonlocal counter
        counter += 1
        # clipping subdivides earlier cap faces; rebuilding planar patches
        # keeps piece complexity bounded as the recursion deepens
        piece = simplify_coplanar_patches(piece)
        try:
            vol = abs(mesh_volume(piece))
            if vol < min_volume:
                closed.append(piece)
                return
            phi = concavity(piece, FINAL_SAMPLES, seed + counter).value
        except DegenerateInput:
            return  # flat shaving, nothing to represent
        if phi <= params.tolerance:
            closed.append(piece)
        else:
            open_pieces.append((phi, counter, piece))

    admit(mesh)
    result = DecomposeResult()
    while open_pieces:
        if len(closed) + len(open_pieces) >= params.max_parts:
            result.budget_exhausted = True
            closed.extend(piece for _, _, piece in open_pieces)
            open_pieces.clear()
            break
        open_pieces.sort(key=lambda item: (-item[0], item[1]))
        _, idx, piece = open_pieces.pop(0)
        try:
            _, inside, outside = _best_split(piece, params, seed + idx)
        except NoValidPlane:
            closed.append(piece)
            continue
        admit(inside)
        admit(outside)

    for piece in closed:
        try:
            part = convex_hull(piece.vertices, source_mesh=piece)
        except DegenerateInput:
            continue
        part.source_volume = abs(mesh_volume(piece))
        result.append(part)
    return result
