// Shared types for the studio: canvas-space strokes, world-space points,
// and the service's wire records.

export interface StrokePoint {
  t: number; // milliseconds on the pointer-event clock
  x: number; // pixels
  y: number; // pixels
}

export type StrokeMode = "demonstration" | "prompt";

export interface CanvasStroke {
  points: StrokePoint[];
  mode: StrokeMode;
}

export interface WorldPoint {
  t: number; // seconds from the stroke start
  x: number; // meters
  y: number; // meters
}

export interface ClassificationStatus {
  state: string;
  samples: number;
  classified: string | null;
  margin: number | null;
  lambda: number | null;
  rotation: number | null;
  ambiguous: boolean;
  scores: Record<string, number> | null;
  detail: string | null;
}

export interface RolloutRecord {
  h: number;
  x: number; // meters
  y: number; // meters
  sigma_norm: number;
}

export interface RolloutTrailer {
  stop_reason: "triggered" | "max_horizon" | "numeric_failure";
  l: number;
  lambda: number;
  rotation: number;
}

export interface RolloutResult {
  records: RolloutRecord[];
  trailer: RolloutTrailer;
}
