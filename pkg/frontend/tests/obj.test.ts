import { describe, expect, it } from "vitest";

import { ObjParseError, parseObj } from "../src/obj.js";

const cubeObj = `
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
`;

describe("parseObj", () => {
  it("parses the canonical cube: 8 vertices, 12 triangles", () => {
    const mesh = parseObj(cubeObj);
    expect(mesh.vertexCount).toBe(8);
    expect(mesh.triangleCount).toBe(12);
    expect(Array.from(mesh.positions.slice(0, 3))).toEqual([0, 0, 0]);
    expect(Array.from(mesh.indices.slice(0, 3))).toEqual([0, 2, 1]);
  });

  it("fan-triangulates polygon faces", () => {
    const mesh = parseObj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    expect(mesh.triangleCount).toBe(2);
    expect(Array.from(mesh.indices)).toEqual([0, 1, 2, 0, 2, 3]);
  });

  it("accepts v/vt/vn slash syntax and negative indices", () => {
    const mesh = parseObj(
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\nf -3 -2 -1\n");
    expect(mesh.triangleCount).toBe(2);
    expect(Array.from(mesh.indices)).toEqual([0, 1, 2, 0, 1, 2]);
  });

  it("ignores comments, normals and groups", () => {
    const mesh = parseObj(
      "# part\no part_0000\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\ns off\nf 1 2 3\n");
    expect(mesh.vertexCount).toBe(3);
    expect(mesh.triangleCount).toBe(1);
  });

  it("rejects out-of-range indices with a descriptive error", () => {
    const bad = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 999\n";
    expect(() => parseObj(bad)).toThrow(ObjParseError);
    expect(() => parseObj(bad)).toThrow(/vertex 999 of a 3-vertex mesh/);
  });

  it("rejects malformed records", () => {
    expect(() => parseObj("v 0 0\n")).toThrow(/3 coordinates/);
    expect(() => parseObj("v 0 0 zebra\n")).toThrow(/bad coordinate/);
    expect(() => parseObj("v 0 0 0\nf 1 0 1\n")).toThrow(/bad vertex index/);
  });
});
