"""Convex polytope primitives: hulls, plane splits, merges and GJK distance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInput, NoConvergence
from .mesh import Aabb, TriangleMesh

CONVEXITY_TOL_FACTOR = 1e-7       # vertex-behind-plane slack, scaled by diagonal
SLIVER_VOLUME_FRACTION = 1e-12    # split side below this fraction is absorbed
GJK_MAX_ITERATIONS = 64
GJK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Plane:
    """Oriented plane; a point x is inside the halfspace iff normal . x <= offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise ValueError("plane normal must be non-zero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(points) @ self.normal - self.offset

    def flipped(self) -> "Plane":
        return Plane(-self.normal, -self.offset)

    @staticmethod
    def axis(axis: int, offset: float, positive: bool = True) -> "Plane":
        n = np.zeros(3)
        n[axis] = 1.0 if positive else -1.0
        return Plane(n, offset if positive else -offset)


class ConvexPart:
    """Watertight convex polytope with cached volume and face planes."""

    __slots__ = ("vertices", "faces", "volume", "_planes", "source_mesh", "provenance", "source_volume")

    def __init__(self, vertices, faces, volume=None, source_mesh=None, provenance=None):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=float).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(faces, dtype=np.int64).reshape(-1, 3))
        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.faces = f
        if volume is None:
            t = v[f]
            volume = float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)
        self.volume = float(volume)
        self._planes = None
        self.source_mesh = source_mesh      # sub-mesh this part approximates, if any
        self.provenance = provenance        # region id or "remainder", set by pipeline
        self.source_volume = None           # solid volume this part accounts for

    def __repr__(self):
        return f"ConvexPart({len(self.vertices)} vertices, volume={self.volume:.6g})"

    @property
    def planes(self) -> np.ndarray:
        """(k, 4) rows [nx, ny, nz, d]; inside means n . x <= d for all rows."""
        if self._planes is None:
            t = self.vertices[self.faces]
            n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
            norms = np.linalg.norm(n, axis=1)
            good = norms > 0
            n = n[good] / norms[good][:, None]
            d = np.einsum("ij,ij->i", n, t[good, 0])
            planes = np.column_stack([n, d])
            # dedupe coplanar triangle faces
            keys = np.round(planes / 1e-9).astype(np.int64)
            _, first = np.unique(keys, axis=0, return_index=True)
            self._planes = planes[np.sort(first)]
        return self._planes

    @property
    def aabb(self) -> Aabb:
        return Aabb(self.vertices.min(axis=0), self.vertices.max(axis=0))

    @property
    def diagonal(self) -> float:
        return self.aabb.diagonal

    def centroid(self) -> np.ndarray:
        # volume centroid via signed tetrahedra against the origin
        t = self.vertices[self.faces]
        vols = np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])) / 6.0
        centers = t.mean(axis=1) * 0.75
        return (centers * vols[:, None]).sum(axis=0) / vols.sum()

    def to_mesh(self) -> TriangleMesh:
        return TriangleMesh(self.vertices, self.faces)

    def with_provenance(self, provenance) -> "ConvexPart":
        part = ConvexPart.__new__(ConvexPart)
        part.vertices = self.vertices
        part.faces = self.faces
        part.volume = self.volume
        part._planes = self._planes
        part.source_mesh = self.source_mesh
        part.provenance = provenance
        part.source_volume = self.source_volume
        return part


def convex_hull(points, source_mesh: TriangleMesh | None = None) -> ConvexPart:
    """Minimal convex polytope of >= 4 affinely independent points.

    Raises :class:`DegenerateInput` for coincident/collinear/coplanar sets.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 4:
        raise DegenerateInput(f"need at least 4 points, got {len(pts)}")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInput(f"degenerate point set: {exc}") from exc
    used = hull.vertices
    remap = np.full(len(pts), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    vertices = pts[used]
    faces = remap[hull.simplices]
    # orient each simplex to match qhull's outward facet normal
    t = vertices[faces]
    geo_n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
    flip = np.einsum("ij,ij->i", geo_n, hull.equations[:, :3]) < 0
    faces[flip] = faces[flip][:, ::-1]
    return ConvexPart(vertices, faces, volume=hull.volume, source_mesh=source_mesh)


def contains_point(part: ConvexPart, point, slack: float) -> bool:
    """Halfspace test against every face plane with the given slack."""
    p = np.asarray(point, dtype=float).reshape(3)
    planes = part.planes
    return bool(np.all(planes[:, :3] @ p <= planes[:, 3] + slack))


def contains_points(part: ConvexPart, points: np.ndarray, slack: float) -> np.ndarray:
    """Vectorized halfspace test; returns a boolean mask."""
    planes = part.planes
    d = np.atleast_2d(points) @ planes[:, :3].T - planes[:, 3]
    return np.all(d <= slack, axis=1)


def fully_inside_box(part: ConvexPart, box: Aabb, slack: float) -> bool:
    """True iff every vertex is inside the box expanded by slack."""
    return bool(np.all(box.contains_points(part.vertices, slack=slack)))


def _unique_edges(faces: np.ndarray) -> np.ndarray:
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


def split_by_plane(part: ConvexPart, plane: Plane):
    """Split a convex part by a plane into (inside, outside).

    Both outputs are convex and watertight; an absent side is returned as
    ``None``.  Slivers below 1e-12 of the part volume are absorbed into the
    other side, which is then returned as the original object.
    """
    s = plane.signed_distance(part.vertices).ravel()
    tol = 1e-12 * max(part.diagonal, 1.0)
    has_inside = np.any(s < -tol)
    has_outside = np.any(s > tol)
    if not has_outside:
        return part, None
    if not has_inside:
        return None, part
    cut_points = []
    for a, b in _unique_edges(part.faces):
        sa, sb = s[a], s[b]
        if (sa < -tol and sb > tol) or (sa > tol and sb < -tol):
            t = sa / (sa - sb)
            cut_points.append(part.vertices[a] + t * (part.vertices[b] - part.vertices[a]))
    cut_points = np.asarray(cut_points).reshape(-1, 3)
    on = np.abs(s) <= tol

    def side(mask):
        pts = np.vstack([part.vertices[mask | on], cut_points])
        try:
            piece = convex_hull(pts)
        except DegenerateInput:
            return None
        if piece.volume < SLIVER_VOLUME_FRACTION * part.volume:
            return None
        return piece

    inside = side(s < -tol)
    outside = side(s > tol)
    if inside is None:
        return None, part
    if outside is None:
        return part, None
    return inside, outside


def intersection_volume(a: ConvexPart, b: ConvexPart) -> float:
    """Volume of a ∩ b, by clipping ``a`` against b's face planes."""
    if not a.aabb.overlaps(b.aabb):
        return 0.0
    piece = a
    for n_d in b.planes:
        piece, _ = split_by_plane(piece, Plane(n_d[:3], n_d[3]))
        if piece is None:
            return 0.0
    return piece.volume


def merge_pair(a: ConvexPart, b: ConvexPart):
    """Hull of the union of vertex sets, plus the added-volume bookkeeping.

    ``volume_error = vol(hull) - vol(a) - vol(b) + vol(a ∩ b)`` so exact
    complements merge with zero error and overlap is not double-counted.
    """
    merged = convex_hull(np.vstack([a.vertices, b.vertices]))
    overlap = intersection_volume(a, b)
    volume_error = merged.volume - a.volume - b.volume + overlap
    return merged, volume_error


# ---------------------------------------------------------------------------
# GJK separation distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation applied as x -> R @ x + t."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(points) @ self.rotation.T + self.translation

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()


def _closest_on_simplex(simplex: np.ndarray):
    """Closest point to the origin on a k-simplex (k <= 3).

    Returns (closest_point, kept_vertex_indices).  Brute force over faces of
    the simplex: for every non-empty subset, solve the least-squares affine
    combination, keep feasible candidates (all barycentric weights >= 0).
    """
    n = len(simplex)
    best = None
    best_d = np.inf
    best_subset = None
    best_w = None
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        pts = simplex[idx]
        if len(pts) == 1:
            w = np.array([1.0])
        else:
            # minimize |sum w_i p_i|^2 with sum w_i = 1
            a = pts @ pts.T
            k = len(pts)
            lhs = np.zeros((k + 1, k + 1))
            lhs[:k, :k] = a
            lhs[k, :k] = 1.0
            lhs[:k, k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(lhs, rhs)
            except np.linalg.LinAlgError:
                continue
            w = sol[:k]
            if np.any(w < -1e-12):
                continue
        p = w @ pts
        d = p @ p
        if d < best_d - 1e-18:
            best_d = d
            best = p
            best_subset = idx
            best_w = w
    return best, best_subset, best_w


def gjk_distance(a: ConvexPart, pose_a: RigidTransform | None,
                 b: ConvexPart, pose_b: RigidTransform | None) -> float:
    """Euclidean separation distance between two posed convex parts.

    Returns 0 when the parts intersect.  Raises :class:`NoConvergence` if the
    iteration fails to settle within 64 steps.
    """
    va = pose_a.apply(a.vertices) if pose_a is not None else a.vertices
    vb = pose_b.apply(b.vertices) if pose_b is not None else b.vertices
    scale = max(float(np.abs(va).max()), float(np.abs(vb).max()), 1.0)

    def support(direction):
        ia = int(np.argmax(va @ direction))
        ib = int(np.argmax(vb @ -direction))
        return va[ia] - vb[ib]

    v = va.mean(axis=0) - vb.mean(axis=0)
    if np.linalg.norm(v) < GJK_TOLERANCE:
        v = np.array([1.0, 0.0, 0.0])
    simplex = []
    for _ in range(GJK_MAX_ITERATIONS):
        w = support(-v)
        dist = np.linalg.norm(v)
        if dist < GJK_TOLERANCE * scale:
            return 0.0
        # no further progress toward the origin: |v| is the distance
        if dist * dist - v @ w <= GJK_TOLERANCE * scale * dist:
            return float(dist)
        simplex.append(w)
        pts = np.array(simplex)
        closest, subset, _ = _closest_on_simplex(pts)
        if closest is None:
            raise NoConvergence("simplex solve failed")
        simplex = [simplex[i] for i in subset]
        if len(simplex) == 4 or np.linalg.norm(closest) < GJK_TOLERANCE * scale:
            return 0.0
        v = closest
    raise NoConvergence("GJK did not converge in 64 iterations")
