/**
 * Heatmap attribute construction from the /evaluate/error response.
 *
 * The server owns the error-to-color mapping; the UI converts its hex
 * strings to GPU vertex colors without recomputing anything from the
 * distances or normalized values.
 */

import type { ErrorSamplesResponse } from "./api.js";

/** Parse "#rrggbb" into [0, 1] RGB components. */
export function hexToRgb01(hex: string): [number, number, number] {
  const match = /^#([0-9a-fA-F]{6})$/.exec(hex);
  if (!match) {
    throw new Error(`bad color ${hex}; expected #rrggbb`);
  }
  const value = parseInt(match[1], 16);
  return [
    ((value >> 16) & 0xff) / 255,
    ((value >> 8) & 0xff) / 255,
    (value & 0xff) / 255,
  ];
}

export interface HeatmapAttributes {
  /** Flat xyz triples of the sample points. */
  positions: Float32Array;
  /** Flat rgb triples, exactly the server-provided colors. */
  colors: Float32Array;
}

export function heatmapAttributes(
  response: ErrorSamplesResponse,
): HeatmapAttributes {
  const n = response.points.length;
  if (response.colors.length !== n) {
    throw new Error(
      `color count ${response.colors.length} != point count ${n}`);
  }
  const positions = new Float32Array(n * 3);
  const colors = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    const p = response.points[i];
    positions[i * 3] = p[0];
    positions[i * 3 + 1] = p[1];
    positions[i * 3 + 2] = p[2];
    const [r, g, b] = hexToRgb01(response.colors[i]);
    colors[i * 3] = r;
    colors[i * 3 + 1] = g;
    colors[i * 3 + 2] = b;
  }
  return { positions, colors };
}
