"""Collision-query throughput proxy for simulation performance.

25 copies of a decomposition are placed on a jittered 5x5 grid inside a
closed box; each step every object receives a small random displacement,
then AABB broad-phase and GJK narrow-phase queries resolve all candidate
pairs.  Throughput is object-pair resolutions per second, normalized by a
per-machine unit-cube calibration into ``proxy_rtf``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .convex import ConvexPart, RigidTransform, convex_hull, gjk_distance
from .errors import ClearanceViolation, EmptyMesh
from .mesh import Aabb
from .pipeline import Decomposition

GRID_SIDE = 5
SPACING_FACTOR = 1.2
JITTER_FRACTION = 0.05
STEP_TRANSLATION_FRACTION = 0.02
STEP_ROTATION_DEG = 2.0
WARMUP_STEPS = 10
CONTACT_TOL = 1e-9
BROADPHASE_MARGIN_FRACTION = 0.5   # of grid spacing; grid neighbors are candidates


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = axis / np.linalg.norm(axis)
    k = np.array([
        [0, -axis[2], axis[1]],
        [axis[2], 0, -axis[0]],
        [-axis[1], axis[0], 0],
    ])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


@dataclass
class BenchScene:
    parts: list[ConvexPart]
    poses: list[RigidTransform]
    wall_box: Aabb
    spacing: float
    seed: int


@dataclass(frozen=True)
class PerfReport:
    queries_per_second: float
    total_narrowphase_queries: int
    broadphase_pairs: int
    duration_wall: float
    proxy_rtf: float
    reference_rate: float
    steps: int
    contacts: int

    def to_dict(self) -> dict:
        return {
            "queries_per_second": self.queries_per_second,
            "total_narrowphase_queries": self.total_narrowphase_queries,
            "broadphase_pairs": self.broadphase_pairs,
            "duration_wall": self.duration_wall,
            "proxy_rtf": self.proxy_rtf,
            "reference_rate": self.reference_rate,
            "steps": self.steps,
            "contacts": self.contacts,
        }

    def summary(self) -> str:
        return (
            f"{self.queries_per_second:.1f} pair-resolutions/s "
            f"({self.total_narrowphase_queries} narrow-phase queries, "
            f"{self.broadphase_pairs} broad-phase pairs, "
            f"proxy_rtf {self.proxy_rtf:.3f})"
        )


def _decomposition_parts(decomp: Decomposition) -> list[ConvexPart]:
    parts = list(decomp.convex_parts)
    for exact in decomp.exact_meshes:
        parts.append(convex_hull(exact.mesh.vertices, source_mesh=exact.mesh))
    if not parts:
        raise EmptyMesh("decomposition has no parts to benchmark")
    return parts


def _object_bounds(parts: list[ConvexPart]) -> Aabb:
    lo = np.min([p.aabb.min for p in parts], axis=0)
    hi = np.max([p.aabb.max for p in parts], axis=0)
    return Aabb(lo, hi)


def _posed_aabb(parts: list[ConvexPart], pose: RigidTransform) -> Aabb:
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for part in parts:
        pts = pose.apply(part.vertices)
        lo = np.minimum(lo, pts.min(axis=0))
        hi = np.maximum(hi, pts.max(axis=0))
    return Aabb(lo, hi)


def _pair_clear(parts: list[ConvexPart], pose_a: RigidTransform,
                pose_b: RigidTransform) -> bool:
    """True when no part pair of the two posed objects touches.

    Posed part AABBs screen out separated pairs; GJK decides the rest.
    """
    lo_a = np.array([pose_a.apply(p.vertices).min(axis=0) for p in parts])
    hi_a = np.array([pose_a.apply(p.vertices).max(axis=0) for p in parts])
    lo_b = np.array([pose_b.apply(p.vertices).min(axis=0) for p in parts])
    hi_b = np.array([pose_b.apply(p.vertices).max(axis=0) for p in parts])
    overlap = np.all(
        (lo_a[:, None, :] <= hi_b[None, :, :] + CONTACT_TOL)
        & (lo_b[None, :, :] <= hi_a[:, None, :] + CONTACT_TOL),
        axis=2,
    )
    for a, b in np.argwhere(overlap):
        if gjk_distance(parts[a], pose_a, parts[b], pose_b) <= CONTACT_TOL:
            return False
    return True


def build_scene(decomp: Decomposition, seed: int = 0,
                jitter_fraction: float = JITTER_FRACTION,
                spacing_factor: float = SPACING_FACTOR) -> BenchScene:
    """Place 25 copies on a jittered grid with verified initial clearance."""
    parts = _decomposition_parts(decomp)
    bounds = _object_bounds(parts)
    spacing = spacing_factor * bounds.diagonal
    center = bounds.center

    rng = np.random.default_rng(seed)
    for _ in range(100):
        poses = []
        for gy in range(GRID_SIDE):
            for gx in range(GRID_SIDE):
                jitter = rng.uniform(-jitter_fraction, jitter_fraction, 3) * spacing
                target = np.array([gx * spacing, gy * spacing, 0.0]) + jitter
                poses.append(RigidTransform(np.eye(3), target - center))
        ok = True
        for i in range(len(poses)):
            for j in range(i + 1, len(poses)):
                # distant grid cells cannot touch under bounded jitter
                if np.linalg.norm(poses[i].translation - poses[j].translation) > 2.1 * bounds.diagonal:
                    continue
                if not _pair_clear(parts, poses[i], poses[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            lo = np.min([_posed_aabb(parts, p).min for p in poses], axis=0)
            hi = np.max([_posed_aabb(parts, p).max for p in poses], axis=0)
            wall = Aabb(lo - 0.5 * spacing, hi + 0.5 * spacing)
            return BenchScene(parts=parts, poses=poses, wall_box=wall,
                              spacing=spacing, seed=seed)
    raise ClearanceViolation("could not jitter the grid into a contact-free start")


def _calibrate_reference_rate(iterations: int = 500) -> float:
    """Object-pair resolutions per second for one unit-cube pair."""
    corners = np.array([[x, y, z] for x in (0., 1.) for y in (0., 1.) for z in (0., 1.)])
    cube = convex_hull(corners)
    pose_a = RigidTransform.identity()
    pose_b = RigidTransform(np.eye(3), np.array([1.5, 0.2, 0.1]))
    t0 = time.perf_counter()
    for _ in range(iterations):
        gjk_distance(cube, pose_a, cube, pose_b)
    elapsed = time.perf_counter() - t0
    return iterations / max(elapsed, 1e-12)


def run_bench(scene: BenchScene, steps: int = 100, seed: int = 0) -> PerfReport:
    """Run the displacement/query loop and report throughput.

    Query counts are deterministic per seed; only the timing fields depend
    on the machine.  Ten warm-up steps run before timing starts.
    """
    reference_rate = _calibrate_reference_rate()
    parts = scene.parts
    n_objects = len(scene.poses)
    poses = list(scene.poses)
    rng = np.random.default_rng(seed)
    max_translation = STEP_TRANSLATION_FRACTION * scene.spacing
    max_rotation = np.deg2rad(STEP_ROTATION_DEG)

    broadphase_pairs = 0
    narrow_queries = 0
    resolved_pairs = 0
    contacts = 0
    elapsed = 0.0

    total_steps = WARMUP_STEPS + steps if steps > 0 else 0
    for step in range(total_steps):
        timed = step >= WARMUP_STEPS
        proposed = []
        for pose in poses:
            translation = rng.uniform(-max_translation, max_translation, 3)
            axis = rng.normal(size=3)
            angle = rng.uniform(-max_rotation, max_rotation)
            rot = _rotation_matrix(axis, angle)
            proposed.append(RigidTransform(rot @ pose.rotation,
                                           pose.translation + translation))
        # keep objects inside the walls
        for i, pose in enumerate(proposed):
            box = _posed_aabb(parts, pose)
            shift = (np.maximum(scene.wall_box.min - box.min, 0.0)
                     + np.minimum(scene.wall_box.max - box.max, 0.0))
            if np.any(shift != 0.0):
                proposed[i] = RigidTransform(pose.rotation, pose.translation + shift)

        t0 = time.perf_counter()
        # per-object posed part bounds; object bounds for the broad phase
        part_lo, part_hi = [], []
        for pose in proposed:
            pts = [pose.apply(part.vertices) for part in parts]
            part_lo.append(np.array([p.min(axis=0) for p in pts]))
            part_hi.append(np.array([p.max(axis=0) for p in pts]))
        obj_lo = np.array([lo.min(axis=0) for lo in part_lo])
        obj_hi = np.array([hi.max(axis=0) for hi in part_hi])

        margin = BROADPHASE_MARGIN_FRACTION * scene.spacing
        frozen = np.zeros(n_objects, dtype=bool)
        for i in range(n_objects):
            for j in range(i + 1, n_objects):
                if np.any(obj_lo[i] - margin > obj_hi[j]) or np.any(obj_lo[j] - margin > obj_hi[i]):
                    continue
                if timed:
                    broadphase_pairs += 1
                    resolved_pairs += 1
                    narrow_queries += len(parts) * len(parts)
                # midphase: posed part AABBs resolve separated pairs without GJK
                overlap = np.all(
                    (part_lo[i][:, None, :] <= part_hi[j][None, :, :] + CONTACT_TOL)
                    & (part_lo[j][None, :, :] <= part_hi[i][:, None, :] + CONTACT_TOL),
                    axis=2,
                )
                touching = False
                for a, b in np.argwhere(overlap):
                    if gjk_distance(parts[a], proposed[i], parts[b], proposed[j]) <= CONTACT_TOL:
                        touching = True
                        break
                if touching:
                    frozen[i] = frozen[j] = True
                    if timed:
                        contacts += 1
        if timed:
            elapsed += time.perf_counter() - t0
        poses = [poses[i] if frozen[i] else proposed[i] for i in range(n_objects)]

    qps = resolved_pairs / elapsed if elapsed > 0 else 0.0
    return PerfReport(
        queries_per_second=qps,
        total_narrowphase_queries=narrow_queries,
        broadphase_pairs=broadphase_pairs,
        duration_wall=elapsed,
        proxy_rtf=qps / reference_rate if reference_rate > 0 else 0.0,
        reference_rate=reference_rate,
        steps=steps,
        contacts=contacts,
    )
