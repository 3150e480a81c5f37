// Pure render-geometry builders: the completion ribbon (stroke width from
// the per-step uncertainty norm), the stop marker, and the classification
// badge text. Keeping these free of canvas state makes the replay-equality
// guarantee testable: same service responses, same overlay geometry.

import type { ClassificationStatus, RolloutResult } from "./types.js";
import { worldToPx, type WorldScale } from "./world.js";

export interface RibbonSegment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  width: number; // px
}

export type MarkerKind = "end" | "warning" | "error";

export interface StopMarker {
  kind: MarkerKind;
  x: number;
  y: number;
}

export interface OverlayGeometry {
  points: { x: number; y: number }[];
  segments: RibbonSegment[];
  marker: StopMarker | null;
}

const RIBBON_MIN_WIDTH = 1.5;
const RIBBON_MAX_WIDTH = 14;
const RIBBON_WIDTH_GAIN = 24; // px per unit of uncertainty norm

export function ribbonWidth(sigmaNorm: number): number {
  const width = RIBBON_MIN_WIDTH + RIBBON_WIDTH_GAIN * sigmaNorm;
  return Math.min(RIBBON_MAX_WIDTH, Math.max(RIBBON_MIN_WIDTH, width));
}

const MARKER_BY_STOP: Record<string, MarkerKind> = {
  triggered: "end",
  max_horizon: "warning",
  numeric_failure: "error",
};

export function buildOverlay(
  rollout: RolloutResult,
  scale: WorldScale,
  anchorPx?: { x: number; y: number },
): OverlayGeometry {
  const points = rollout.records.map((r) => worldToPx(r.x, r.y, scale));
  const segments: RibbonSegment[] = [];
  let prev = anchorPx ?? points[0];
  for (let i = 0; i < points.length; i++) {
    if (prev !== undefined && !(i === 0 && anchorPx === undefined)) {
      segments.push({
        x1: prev.x,
        y1: prev.y,
        x2: points[i].x,
        y2: points[i].y,
        width: ribbonWidth(rollout.records[i].sigma_norm),
      });
    }
    prev = points[i];
  }
  const last = points[points.length - 1];
  const marker: StopMarker | null =
    last === undefined
      ? null
      : { kind: MARKER_BY_STOP[rollout.trailer.stop_reason] ?? "error", ...last };
  return { points, segments, marker };
}

export function badgeText(status: ClassificationStatus): string {
  if (status.classified === null) {
    return status.detail ?? "collecting";
  }
  const parts = [status.classified];
  if (status.ambiguous) parts.push("ambiguous");
  if (status.margin !== null && Number.isFinite(status.margin)) {
    parts.push(`margin ${status.margin.toFixed(3)}`);
  }
  if (status.lambda !== null) {
    parts.push(`scale ${status.lambda.toFixed(2)}`);
  }
  if (status.rotation !== null) {
    const degrees = (status.rotation * 180) / Math.PI;
    parts.push(`rot ${degrees.toFixed(0)}°`);
  }
  return parts.join(" · ");
}
