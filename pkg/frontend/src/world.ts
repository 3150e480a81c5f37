// Canvas-to-world conversion. The default scale maps 100 px to 0.1 m
// (0.001 m/px); canvas y grows downward while world y grows upward, so the
// y axis flips in both directions.

import type { StrokePoint, WorldPoint } from "./types.js";

export interface WorldScale {
  metersPerPixel: number;
  originPx: { x: number; y: number };
}

export const DEFAULT_SCALE: WorldScale = {
  metersPerPixel: 0.001,
  originPx: { x: 0, y: 0 },
};

export function pxToWorld(
  point: StrokePoint,
  scale: WorldScale,
  t0Ms: number,
): WorldPoint {
  return {
    t: (point.t - t0Ms) / 1000,
    x: (point.x - scale.originPx.x) * scale.metersPerPixel,
    y: (scale.originPx.y - point.y) * scale.metersPerPixel,
  };
}

export function worldToPx(
  x: number,
  y: number,
  scale: WorldScale,
): { x: number; y: number } {
  return {
    x: scale.originPx.x + x / scale.metersPerPixel,
    y: scale.originPx.y - y / scale.metersPerPixel,
  };
}

/** Convert a full stroke, rebasing time to the first point. */
export function strokeToWorld(
  points: StrokePoint[],
  scale: WorldScale,
): WorldPoint[] {
  if (points.length === 0) return [];
  const t0 = points[0].t;
  return points.map((p) => pxToWorld(p, scale, t0));
}
