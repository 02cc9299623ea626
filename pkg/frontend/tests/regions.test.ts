import { describe, expect, it } from "vitest";

import {
  center, exportRegions, halfExtents, importRegions, regionColor,
  regionFromCenterCorner, withCenter, withHalfExtents,
  type RegionsFile, type UiRegion,
} from "../src/regions.js";

const sampleFile: RegionsFile = {
  regions: [
    { id: "notch", min: [0, 1, 0], max: [1, 2, 1], tolerance: 0.0 },
    { id: "cavity", min: [0.25, 0.25, 0.7], max: [0.75, 0.75, 1.0],
      tolerance: 0.25 },
    // awkward floats must survive the round trip bit-identically
    { id: "odd", min: [-1.1000000000000001, 0.1, 1e-9],
      max: [0.30000000000000004, 0.7, 2.5], tolerance: 0.007 },
  ],
  remainder_tolerance: 0.05,
  seed: 3,
};

describe("region round trip", () => {
  it("import then export reproduces the file exactly", () => {
    const regions = importRegions(sampleFile);
    const out = exportRegions(regions, { remainderTolerance: 0.05, seed: 3 });
    expect(out).toEqual(sampleFile);
    expect(JSON.stringify(out)).toBe(JSON.stringify(sampleFile));
  });

  it("export then import preserves the region set including colors", () => {
    const regions = importRegions(sampleFile);
    const again = importRegions(exportRegions(regions));
    expect(again).toEqual(regions);
  });

  it("assigns deterministic palette colors by position", () => {
    const regions = importRegions(sampleFile);
    expect(regions.map((r) => r.color)).toEqual(
      [regionColor(0), regionColor(1), regionColor(2)]);
  });
});

describe("import validation", () => {
  it("rejects inverted boxes", () => {
    expect(() => importRegions({
      regions: [{ id: "bad", min: [1, 0, 0], max: [0, 1, 1], tolerance: 0 }],
    })).toThrow(/min must not exceed max/);
  });

  it("rejects negative tolerances and short vectors", () => {
    expect(() => importRegions({
      regions: [{ id: "bad", min: [0, 0, 0], max: [1, 1, 1], tolerance: -1 }],
    })).toThrow(/tolerance/);
    expect(() => importRegions({
      regions: [{ id: "bad", min: [0, 0], max: [1, 1, 1], tolerance: 0 }],
    })).toThrow(/3 components/);
  });

  it("rejects files without a regions array", () => {
    expect(() => importRegions({} as RegionsFile)).toThrow(/regions/);
  });
});

describe("center and half-extent views", () => {
  const region: UiRegion = {
    id: "r", min: [0, -2, 1], max: [4, 0, 2], tolerance: 0.1, color: "#fff",
  };

  it("derives center and half extents from the corners", () => {
    expect(center(region)).toEqual([2, -1, 1.5]);
    expect(halfExtents(region)).toEqual([2, 1, 0.5]);
  });

  it("moves the box when the center is edited", () => {
    const moved = withCenter(region, [0, 0, 0]);
    expect(moved.min).toEqual([-2, -1, -0.5]);
    expect(moved.max).toEqual([2, 1, 0.5]);
    expect(halfExtents(moved)).toEqual(halfExtents(region));
  });

  it("resizes around the fixed center and clamps negatives to zero", () => {
    const resized = withHalfExtents(region, [1, -5, 0.5]);
    expect(center(resized)).toEqual(center(region));
    expect(halfExtents(resized)).toEqual([1, 0, 0.5]);
  });
});

describe("center + corner drawing", () => {
  it("builds the symmetric box of the paper's draw gesture", () => {
    const region = regionFromCenterCorner(
      "drawn", [1, 1, 1], [2, 0.5, 3], 0.05, "#abc");
    expect(region.min).toEqual([0, 0.5, -1]);
    expect(region.max).toEqual([2, 1.5, 3]);
    expect(region.tolerance).toBe(0.05);
  });
});
