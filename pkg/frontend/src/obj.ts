/**
 * Client-side parser for the ASCII OBJ part files served by the job API.
 *
 * Supports `v` and `f` records with 1-based (or negative) indices and
 * `v/vt/vn` slash syntax; polygon faces are fan-triangulated.  Everything
 * else (normals, materials, groups) is ignored.
 */

export interface ParsedMesh {
  /** Flat xyz triples. */
  positions: Float32Array;
  /** Flat triangle index triples into positions/3. */
  indices: Uint32Array;
  vertexCount: number;
  triangleCount: number;
}

export class ObjParseError extends Error {
  constructor(message: string, readonly line: number) {
    super(`line ${line}: ${message}`);
    this.name = "ObjParseError";
  }
}

export function parseObj(text: string): ParsedMesh {
  const positions: number[] = [];
  const indices: number[] = [];
  const lines = text.split(/\r?\n/);
  for (let ln = 0; ln < lines.length; ln++) {
    const line = lines[ln].trim();
    if (line === "" || line.startsWith("#")) {
      continue;
    }
    const fields = line.split(/\s+/);
    if (fields[0] === "v") {
      if (fields.length < 4) {
        throw new ObjParseError("vertex needs 3 coordinates", ln + 1);
      }
      for (let k = 1; k <= 3; k++) {
        const value = Number(fields[k]);
        if (!Number.isFinite(value)) {
          throw new ObjParseError(`bad coordinate ${fields[k]!}`, ln + 1);
        }
        positions.push(value);
      }
    } else if (fields[0] === "f") {
      if (fields.length < 4) {
        throw new ObjParseError("face needs at least 3 vertices", ln + 1);
      }
      const nVertices = positions.length / 3;
      const corner: number[] = [];
      for (let k = 1; k < fields.length; k++) {
        const raw = fields[k].split("/")[0];
        const index = Number(raw);
        if (!Number.isInteger(index) || index === 0) {
          throw new ObjParseError(`bad vertex index ${raw}`, ln + 1);
        }
        // OBJ is 1-based; negatives count back from the latest vertex
        const resolved = index > 0 ? index - 1 : nVertices + index;
        if (resolved < 0 || resolved >= nVertices) {
          throw new ObjParseError(
            `face references vertex ${index} of a ` +
            `${nVertices}-vertex mesh`, ln + 1);
        }
        corner.push(resolved);
      }
      for (let k = 1; k + 1 < corner.length; k++) {
        indices.push(corner[0], corner[k], corner[k + 1]);
      }
    }
    // vn / vt / usemtl / o / g / s are display-irrelevant here
  }
  return {
    positions: new Float32Array(positions),
    indices: new Uint32Array(indices),
    vertexCount: positions.length / 3,
    triangleCount: indices.length / 3,
  };
}
