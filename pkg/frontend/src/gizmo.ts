/**
 * Box gizmo editing logic, kept free of rendering concerns.
 *
 * A drag session accumulates a provisional face offset; numeric entry is
 * authoritative, so applying a numeric edit discards any conflicting
 * pending drag instead of merging with it.
 */

import type { UiRegion, Vec3 } from "./regions.js";
import { center, halfExtents, withCenter, withHalfExtents } from "./regions.js";

export type Axis = 0 | 1 | 2;
export type Sign = 1 | -1;

export interface FaceHandle {
  axis: Axis;
  sign: Sign;
}

/** Move one face of the box by `delta` along its outward axis. */
export function applyFaceDrag(
  region: UiRegion, handle: FaceHandle, delta: number,
): UiRegion {
  const min = [...region.min] as Vec3;
  const max = [...region.max] as Vec3;
  if (handle.sign > 0) {
    max[handle.axis] = Math.max(
      min[handle.axis], max[handle.axis] + delta);
  } else {
    min[handle.axis] = Math.min(
      max[handle.axis], min[handle.axis] - delta);
  }
  return { ...region, min, max };
}

/** Translate the whole box. */
export function applyCenterDrag(region: UiRegion, delta: Vec3): UiRegion {
  const c = center(region);
  return withCenter(
    region, [c[0] + delta[0], c[1] + delta[1], c[2] + delta[2]]);
}

export type NumericField =
  | { kind: "center"; axis: Axis }
  | { kind: "halfExtent"; axis: Axis }
  | { kind: "tolerance" };

export class GizmoSession {
  private pending: { handle: FaceHandle; delta: number } | null = null;

  constructor(private region: UiRegion) {}

  /** Region including any provisional (not yet committed) drag. */
  preview(): UiRegion {
    if (this.pending === null) {
      return this.region;
    }
    return applyFaceDrag(
      this.region, this.pending.handle, this.pending.delta);
  }

  /** Committed region, ignoring provisional drag state. */
  committed(): UiRegion {
    return this.region;
  }

  drag(handle: FaceHandle, delta: number): void {
    this.pending = { handle, delta };
  }

  commitDrag(): UiRegion {
    this.region = this.preview();
    this.pending = null;
    return this.region;
  }

  /**
   * Apply a numeric edit.  Numeric entry is authoritative: a pending drag
   * is discarded, never combined with the typed value.
   */
  applyNumeric(field: NumericField, value: number): UiRegion {
    this.pending = null;
    if (field.kind === "tolerance") {
      this.region = { ...this.region, tolerance: Math.max(0, value) };
    } else if (field.kind === "center") {
      const c = center(this.region);
      c[field.axis] = value;
      this.region = withCenter(this.region, c);
    } else {
      const h = halfExtents(this.region);
      h[field.axis] = value;
      this.region = withHalfExtents(this.region, h);
    }
    return this.region;
  }
}

/** Nearest candidate surface point, for center/face snapping. */
export function snapToNearest(
  target: Vec3, candidates: Vec3[],
): Vec3 | null {
  let best: Vec3 | null = null;
  let bestD2 = Infinity;
  for (const p of candidates) {
    const d2 = (p[0] - target[0]) ** 2 + (p[1] - target[1]) ** 2
      + (p[2] - target[2]) ** 2;
    if (d2 < bestD2) {
      bestD2 = d2;
      best = p;
    }
  }
  return best;
}
