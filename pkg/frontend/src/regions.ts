/**
 * Region model mirrored against the server's RegionBox schema.
 *
 * The axis-aligned min/max corners are the authoritative representation so
 * a region set exported to JSON re-imports bit-identically; center and
 * half-extents are derived views for the numeric editor and the gizmo.
 */

export type Vec3 = [number, number, number];

export interface UiRegion {
  id: string;
  min: Vec3;
  max: Vec3;
  tolerance: number;
  color: string;
}

/** One entry of the server's regions JSON schema. */
export interface RegionJson {
  id: string;
  min: number[];
  max: number[];
  tolerance: number;
}

/** The regions file accepted by PUT /meshes/{id}/regions and decompose jobs. */
export interface RegionsFile {
  regions: RegionJson[];
  remainder_tolerance?: number;
  merge_tolerance?: number;
  seed?: number;
}

/** Deterministic palette so re-imported regions get the same colors back. */
export const REGION_PALETTE = [
  "#e6194b", "#3cb44b", "#4363d8", "#f58231",
  "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
];

export function regionColor(index: number): string {
  return REGION_PALETTE[index % REGION_PALETTE.length];
}

export function center(region: UiRegion): Vec3 {
  return [0, 1, 2].map(
    (a) => (region.min[a] + region.max[a]) / 2) as Vec3;
}

export function halfExtents(region: UiRegion): Vec3 {
  return [0, 1, 2].map(
    (a) => (region.max[a] - region.min[a]) / 2) as Vec3;
}

/** Rebuild min/max from an edited center, keeping the current extents. */
export function withCenter(region: UiRegion, c: Vec3): UiRegion {
  const h = halfExtents(region);
  return {
    ...region,
    min: [c[0] - h[0], c[1] - h[1], c[2] - h[2]],
    max: [c[0] + h[0], c[1] + h[1], c[2] + h[2]],
  };
}

/** Rebuild min/max from edited half-extents, keeping the current center. */
export function withHalfExtents(region: UiRegion, h: Vec3): UiRegion {
  const c = center(region);
  const clamped = h.map((v) => Math.max(0, v)) as Vec3;
  return {
    ...region,
    min: [c[0] - clamped[0], c[1] - clamped[1], c[2] - clamped[2]],
    max: [c[0] + clamped[0], c[1] + clamped[1], c[2] + clamped[2]],
  };
}

/** Box from a picked center point and one dragged corner (symmetric). */
export function regionFromCenterCorner(
  id: string, centerPoint: Vec3, corner: Vec3,
  tolerance: number, color: string,
): UiRegion {
  const h = [0, 1, 2].map(
    (a) => Math.abs(corner[a] - centerPoint[a])) as Vec3;
  return {
    id, tolerance, color,
    min: [centerPoint[0] - h[0], centerPoint[1] - h[1], centerPoint[2] - h[2]],
    max: [centerPoint[0] + h[0], centerPoint[1] + h[1], centerPoint[2] + h[2]],
  };
}

export interface ExportOptions {
  remainderTolerance?: number;
  mergeTolerance?: number;
  seed?: number;
}

/** Serialize to the server schema (colors are a UI concern and omitted). */
export function exportRegions(
  regions: UiRegion[], options: ExportOptions = {},
): RegionsFile {
  const file: RegionsFile = {
    regions: regions.map((r) => ({
      id: r.id,
      min: [...r.min],
      max: [...r.max],
      tolerance: r.tolerance,
    })),
  };
  if (options.remainderTolerance !== undefined) {
    file.remainder_tolerance = options.remainderTolerance;
  }
  if (options.mergeTolerance !== undefined) {
    file.merge_tolerance = options.mergeTolerance;
  }
  if (options.seed !== undefined) {
    file.seed = options.seed;
  }
  return file;
}

/** Parse a regions file; colors are reassigned from the fixed palette. */
export function importRegions(file: RegionsFile): UiRegion[] {
  if (!Array.isArray(file.regions)) {
    throw new Error("regions file must contain a 'regions' array");
  }
  return file.regions.map((entry, i) => {
    if (entry.min.length !== 3 || entry.max.length !== 3) {
      throw new Error(`region ${entry.id}: min/max must have 3 components`);
    }
    for (let a = 0; a < 3; a++) {
      if (!(entry.min[a] <= entry.max[a])) {
        throw new Error(`region ${entry.id}: min must not exceed max`);
      }
    }
    if (!(entry.tolerance >= 0)) {
      throw new Error(`region ${entry.id}: tolerance must be >= 0`);
    }
    return {
      id: String(entry.id),
      min: [entry.min[0], entry.min[1], entry.min[2]] as Vec3,
      max: [entry.max[0], entry.max[1], entry.max[2]] as Vec3,
      tolerance: entry.tolerance,
      color: regionColor(i),
    };
  });
}
