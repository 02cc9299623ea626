"""Region-aware decomposition orchestrator.

The interactive loop: subtract the selected region boxes from the mesh,
decompose each box clip at its own tolerance (or keep it exact at zero
tolerance), decompose the remainder coarsely while keeping it out of every
box, and finally merge neighboring parts within the volume-error budget.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .acd import AcdParams, convex_decompose
from .boolean import (
    bool_difference_convex,
    boolean_difference_boxes,
    boolean_intersect_box,
)
from .convex import ConvexPart, intersection_volume
from .errors import NotWatertight, OverlappingRegions
from .merging import merge_neighbors as _merge_neighbors
from .mesh import Aabb, TriangleMesh, mesh_aabb, mesh_volume, validate

REMAINDER = "remainder"
EXCLUSION_SLACK_FACTOR = 1e-6   # vertex slack, fraction of the mesh diagonal


@dataclass(frozen=True)
class RegionBox:
    """Axis-aligned selection box with a per-region error tolerance."""

    id: str
    box: Aabb
    tolerance: float

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError(f"region {self.id!r}: tolerance must be >= 0")


@dataclass(frozen=True)
class PipelineParams:
    regions: tuple[RegionBox, ...] = ()
    remainder_tolerance: float = 0.05
    merge_tolerance: float = 0.0
    acd: AcdParams = field(default_factory=lambda: AcdParams(tolerance=0.05))
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if self.remainder_tolerance <= 0:
            raise ValueError("remainder_tolerance must be > 0")
        if self.merge_tolerance < 0:
            raise ValueError("merge_tolerance must be >= 0")


@dataclass
class RegionValidationReport:
    overlapping_pairs: list[tuple[str, str]] = field(default_factory=list)
    empty_regions: list[str] = field(default_factory=list)
    zero_volume_regions: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.overlapping_pairs

    @property
    def warnings(self) -> list[str]:
        return (
            [f"region {r!r} does not touch the mesh; skipped" for r in self.empty_regions]
            + [f"region {r!r} has zero volume; skipped" for r in self.zero_volume_regions]
        )


@dataclass(frozen=True)
class ExactRegionMesh:
    """Verbatim clipped sub-mesh from a zero-tolerance region."""

    region_id: str
    mesh: TriangleMesh


@dataclass
class DecompositionStats:
    part_count: int = 0
    exact_mesh_count: int = 0
    per_region_counts: dict[str, int] = field(default_factory=dict)
    wall_time_s: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "part_count": self.part_count,
            "exact_mesh_count": self.exact_mesh_count,
            "per_region_counts": dict(self.per_region_counts),
            "wall_time_s": self.wall_time_s,
            "warnings": list(self.warnings),
        }


@dataclass
class Decomposition:
    convex_parts: list[ConvexPart]
    exact_meshes: list[ExactRegionMesh]
    stats: DecompositionStats

    @property
    def total_parts(self) -> int:
        return len(self.convex_parts) + len(self.exact_meshes)


def validate_regions(mesh: TriangleMesh, regions: list[RegionBox]) -> RegionValidationReport:
    """Check regions for overlap and emptiness; overlap is a hard error.

    Boxes sharing only a face are fine; interior overlap raises
    :class:`OverlappingRegions` because intersecting each box against the
    full mesh would double-cover the overlap.
    """
    report = RegionValidationReport()
    mesh_box = mesh_aabb(mesh)
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            if regions[i].box.interior_overlaps(regions[j].box):
                report.overlapping_pairs.append((regions[i].id, regions[j].id))
    for region in regions:
        if region.box.volume <= 0:
            report.zero_volume_regions.append(region.id)
        elif not region.box.overlaps(mesh_box):
            report.empty_regions.append(region.id)
    if report.overlapping_pairs:
        pairs = ", ".join(f"{a!r}/{b!r}" for a, b in report.overlapping_pairs)
        raise OverlappingRegions(f"region boxes overlap: {pairs}")
    return report


def process_box(box: RegionBox, mesh: TriangleMesh, acd: AcdParams,
                seed: int = 0):
    """Clip the mesh to one region box and decompose at its tolerance.

    Returns ``(convex_parts, exact_meshes)``: a zero-tolerance region yields
    the clipped sub-mesh verbatim and no convex parts; a missing
    intersection yields two empty lists.  The convex list keeps the
    ``budget_exhausted`` flag from :func:`~regionacd.acd.convex_decompose`.
    """
    clipped = boolean_intersect_box(mesh, box.box)
    if clipped is None:
        return [], []
    if box.tolerance == 0:
        return [], [ExactRegionMesh(box.id, clipped)]
    params = AcdParams(
        tolerance=box.tolerance,
        max_parts=acd.max_parts,
        candidate_planes_per_axis=acd.candidate_planes_per_axis,
        min_part_volume_fraction=acd.min_part_volume_fraction,
    )
    parts = convex_decompose(clipped, params, seed=seed)
    for part in parts:
        part.provenance = box.id
    return parts, []


def decomp_remainder(mesh_rem: TriangleMesh, boxes: list[Aabb], eps_rem: float,
                     acd: AcdParams | None = None, seed: int = 0) -> list[ConvexPart]:
    """Decompose the remainder and push its parts out of every region box.

    The coarse decomposition may produce hulls that bulge into the boxes;
    each box then splits the offending parts along its faces and drops the
    inside pieces, keeping every output convex.
    """
    acd = acd or AcdParams(tolerance=eps_rem)
    params = AcdParams(
        tolerance=eps_rem,
        max_parts=acd.max_parts,
        candidate_planes_per_axis=acd.candidate_planes_per_axis,
        min_part_volume_fraction=acd.min_part_volume_fraction,
    )
    parts = convex_decompose(mesh_rem, params, seed=seed)
    budget = parts.budget_exhausted
    out: list[ConvexPart] = list(parts)
    for part in out:
        part.provenance = REMAINDER
    for box in boxes:
        out = bool_difference_convex(out, box)
    for part in out:
        part.provenance = REMAINDER
    result = list(out)
    if budget:
        result = _FlaggedParts(result)
    return result


class _FlaggedParts(list):
    budget_exhausted = True


def merge_neighbors(parts: list[ConvexPart], tau: float,
                    boxes: list[Aabb] = (), diagonal: float | None = None) -> list[ConvexPart]:
    """Merge adjacent parts within the volume-error budget ``tau``.

    Only same-provenance pairs merge: region parts stay inside their box
    by convexity, and remainder merges are additionally re-checked so the
    merged hull puts no vertex strictly inside any region box.
    """
    if diagonal is None and parts:
        lo = np.min([p.aabb.min for p in parts], axis=0)
        hi = np.max([p.aabb.max for p in parts], axis=0)
        diagonal = float(np.linalg.norm(hi - lo))
    slack = EXCLUSION_SLACK_FACTOR * (diagonal or 1.0)

    def allowed(a: ConvexPart, b: ConvexPart, merged: ConvexPart) -> bool:
        if a.provenance != b.provenance:
            return False
        if a.provenance == REMAINDER:
            for box in boxes:
                if bool(np.any(box.contains_points(merged.vertices, slack=-slack))):
                    return False
        return True

    return _merge_neighbors(parts, tau, allowed=allowed)


def interactive_decomposition(mesh: TriangleMesh, params: PipelineParams) -> Decomposition:
    """Run the full region-aware decomposition pipeline.

    Per-box clipping/decomposition and the remainder decomposition run
    concurrently; results are gathered in submission order, so the output
    is independent of the thread count.
    """
    t0 = time.perf_counter()
    report = validate(mesh)
    if not report.watertight:
        raise NotWatertight("input mesh must be watertight")
    region_report = validate_regions(mesh, list(params.regions))
    warnings = list(region_report.warnings)
    skipped = set(region_report.empty_regions) | set(region_report.zero_volume_regions)
    active = [r for r in params.regions if r.id not in skipped]
    boxes = [r.box for r in active]
    diagonal = mesh_aabb(mesh).diagonal

    mesh_rem = boolean_difference_boxes(mesh, boxes) if boxes else mesh

    def run_box(item):
        index, region = item
        return process_box(region, mesh, params.acd, seed=params.seed + 1000 * (index + 1))

    def run_remainder():
        if mesh_rem is None:
            return []
        return decomp_remainder(mesh_rem, boxes, params.remainder_tolerance,
                                acd=params.acd, seed=params.seed)

    max_workers = params.threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        box_futures = [pool.submit(run_box, (i, r)) for i, r in enumerate(active)]
        rem_future = pool.submit(run_remainder)
        box_results = [f.result() for f in box_futures]
        remainder_parts = rem_future.result()

    convex_parts: list[ConvexPart] = []
    exact_meshes: list[ExactRegionMesh] = []
    per_region: dict[str, int] = {}
    for region, (convex, exact) in zip(active, box_results):
        convex_parts.extend(convex)
        exact_meshes.extend(exact)
        per_region[region.id] = len(convex) + len(exact)
        if getattr(convex, "budget_exhausted", False):
            warnings.append(f"region {region.id!r}: part budget exhausted before "
                            f"reaching tolerance {region.tolerance}")
    if getattr(remainder_parts, "budget_exhausted", False):
        warnings.append("remainder: part budget exhausted before reaching tolerance")
    convex_parts.extend(remainder_parts)
    per_region[REMAINDER] = len(remainder_parts)

    merged = merge_neighbors(convex_parts, params.merge_tolerance,
                             boxes=boxes, diagonal=diagonal)

    stats = DecompositionStats(
        part_count=len(merged),
        exact_mesh_count=len(exact_meshes),
        per_region_counts=per_region,
        wall_time_s=time.perf_counter() - t0,
        warnings=warnings,
    )
    return Decomposition(convex_parts=merged, exact_meshes=exact_meshes, stats=stats)


def verify_decomposition(mesh: TriangleMesh, decomp: Decomposition,
                         regions: list[RegionBox]) -> list[str]:
    """Check the partition and region-exclusion invariants; returns violations.

    Partition: source volumes across provenances sum to the input volume
    (1e-6 relative) and parts of different provenance overlap by less than
    1e-6 of the total volume.  Region-exclusion: every convex part's
    vertices lie entirely within one region box or entirely outside all of
    them, with slack 1e-6 of the mesh diagonal.
    """
    problems: list[str] = []
    total = abs(mesh_volume(mesh))
    diagonal = mesh_aabb(mesh).diagonal
    slack = EXCLUSION_SLACK_FACTOR * diagonal

    covered = sum(p.source_volume or p.volume for p in decomp.convex_parts)
    covered += sum(abs(mesh_volume(e.mesh)) for e in decomp.exact_meshes)
    if total > 0 and abs(covered - total) / total > 1e-6:
        problems.append(
            f"partition: source volumes sum to {covered:.9g}, input volume {total:.9g}"
        )

    parts = decomp.convex_parts
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if parts[i].provenance == parts[j].provenance:
                continue
            if not parts[i].aabb.interior_overlaps(parts[j].aabb, tol=-slack):
                continue
            overlap = intersection_volume(parts[i], parts[j])
            if overlap > 1e-6 * total:
                problems.append(
                    f"partition: parts {i} ({parts[i].provenance}) and {j} "
                    f"({parts[j].provenance}) overlap by {overlap:.3g}"
                )

    boxes = {r.id: r.box for r in regions}
    for i, part in enumerate(parts):
        inside_any = False
        for rid, box in boxes.items():
            if bool(np.all(box.expanded(slack).contains_points(part.vertices))):
                inside_any = True
                break
        if inside_any:
            continue
        for rid, box in boxes.items():
            if bool(np.any(box.contains_points(part.vertices, slack=-slack))):
                problems.append(
                    f"region-exclusion: part {i} ({part.provenance}) straddles "
                    f"region {rid!r}"
                )
                break
    return problems


def params_from_dict(data: dict) -> PipelineParams:
    """Build :class:`PipelineParams` from the regions-file JSON schema."""
    regions = []
    for entry in data.get("regions", []):
        regions.append(RegionBox(
            id=str(entry["id"]),
            box=Aabb(np.asarray(entry["min"], dtype=float),
                     np.asarray(entry["max"], dtype=float)),
            tolerance=float(entry["tolerance"]),
        ))
    kwargs = {}
    if "remainder_tolerance" in data:
        kwargs["remainder_tolerance"] = float(data["remainder_tolerance"])
    if "merge_tolerance" in data:
        kwargs["merge_tolerance"] = float(data["merge_tolerance"])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    return PipelineParams(regions=tuple(regions), **kwargs)


def params_to_dict(params: PipelineParams) -> dict:
    return {
        "regions": [
            {
                "id": r.id,
                "min": [float(x) for x in r.box.min],
                "max": [float(x) for x in r.box.max],
                "tolerance": r.tolerance,
            }
            for r in params.regions
        ],
        "remainder_tolerance": params.remainder_tolerance,
        "merge_tolerance": params.merge_tolerance,
        "seed": params.seed,
    }


def load_regions_file(path) -> PipelineParams:
    """Read a regions JSON file into :class:`PipelineParams`."""
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))


def save_decomposition(decomp: Decomposition, directory) -> dict:
    """Write part/exact OBJ files plus ``manifest.json``; returns the manifest."""
    from pathlib import Path

    from .mesh import save_mesh

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    part_files, exact_files = [], []
    for i, part in enumerate(decomp.convex_parts):
        name = f"part_{i:04d}.obj"
        save_mesh(part.to_mesh(), directory / name)
        part_files.append(name)
    for i, exact in enumerate(decomp.exact_meshes):
        name = f"exact_{i:04d}.obj"
        save_mesh(exact.mesh, directory / name)
        exact_files.append(name)
    manifest = decomposition_manifest(decomp, part_files, exact_files)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def load_decomposition(path) -> Decomposition:
    """Read a decomposition saved by :func:`save_decomposition`.

    ``path`` may be the manifest file or its directory.
    """
    from pathlib import Path

    from .convex import convex_hull
    from .mesh import load_mesh

    path = Path(path)
    manifest_path = path / "manifest.json" if path.is_dir() else path
    directory = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    parts = []
    for entry in manifest["parts"]:
        mesh = load_mesh(directory / entry["file"])
        part = convex_hull(mesh.vertices, source_mesh=mesh)
        part.provenance = entry.get("provenance")
        part.source_volume = entry.get("volume")
        parts.append(part)
    exact = []
    for entry in manifest["exact_meshes"]:
        exact.append(ExactRegionMesh(entry["region_id"],
                                     load_mesh(directory / entry["file"])))
    stats = DecompositionStats(part_count=len(parts), exact_mesh_count=len(exact))
    return Decomposition(parts, exact, stats)


def decomposition_manifest(decomp: Decomposition, part_files: list[str] | None = None,
                           exact_files: list[str] | None = None) -> dict:
    """JSON-serializable manifest of a decomposition."""
    parts = []
    for i, part in enumerate(decomp.convex_parts):
        entry = {
            "index": i,
            "provenance": part.provenance,
            "volume": part.volume,
            "n_vertices": len(part.vertices),
        }
        if part_files:
            entry["file"] = part_files[i]
        parts.append(entry)
    exact = []
    for i, em in enumerate(decomp.exact_meshes):
        entry = {
            "index": i,
            "region_id": em.region_id,
            "n_vertices": len(em.mesh.vertices),
            "n_faces": len(em.mesh.faces),
        }
        if exact_files:
            entry["file"] = exact_files[i]
        exact.append(entry)
    return {
        "parts": parts,
        "exact_meshes": exact,
        "stats": decomp.stats.to_dict(),
    }
