// Canvas studio: draw a demonstration (green), draw a partial prompt (blue),
// watch the predicted completion render with an uncertainty ribbon. All
// inference happens in the session service; this file only wires DOM events
// to the client and paints what comes back.

import { PointBatcher } from "./batching.js";
import { SessionClient, ServiceError } from "./client.js";
import { badgeText, buildOverlay, type OverlayGeometry } from "./overlay.js";
import type {
  CanvasStroke,
  ClassificationStatus,
  StrokePoint,
  WorldPoint,
} from "./types.js";
import { DEFAULT_SCALE, strokeToWorld, worldToPx, type WorldScale } from "./world.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8000";

const canvas = document.getElementById("board") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const badge = document.getElementById("badge")!;
const skillList = document.getElementById("skills")!;
const banner = document.getElementById("banner")!;
const toasts = document.getElementById("toasts")!;
const modeButtons = {
  demonstration: document.getElementById("mode-demo") as HTMLButtonElement,
  prompt: document.getElementById("mode-prompt") as HTMLButtonElement,
};
const finishButton = document.getElementById("finish") as HTMLButtonElement;
const scaleInput = document.getElementById("scale-mpp") as HTMLInputElement;

let scale: WorldScale = {
  ...DEFAULT_SCALE,
  originPx: { x: canvas.width / 2, y: canvas.height / 2 },
};
scaleInput.value = String(scale.metersPerPixel);
scaleInput.addEventListener("change", () => {
  const value = Number(scaleInput.value);
  if (Number.isFinite(value) && value > 0) {
    scale = { ...scale, metersPerPixel: value };
    redraw();
  }
});

type Mode = "demonstration" | "prompt";
let mode: Mode = "demonstration";
let drawing = false;
let currentStroke: CanvasStroke | null = null;
const finishedStrokes: CanvasStroke[] = [];
let overlay: OverlayGeometry | null = null;
let lastStatus: ClassificationStatus | null = null;
let promptAnchor: { x: number; y: number } | null = null;

const client = new SessionClient(SERVICE_URL);
let batcher: PointBatcher<ClassificationStatus> | null = null;

function toast(message: string): void {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  toasts.append(node);
  setTimeout(() => node.remove(), 4000);
}

function setMode(next: Mode): void {
  mode = next;
  modeButtons.demonstration.classList.toggle("active", next === "demonstration");
  modeButtons.prompt.classList.toggle("active", next === "prompt");
}
modeButtons.demonstration.addEventListener("click", () => setMode("demonstration"));
modeButtons.prompt.addEventListener("click", () => setMode("prompt"));

function strokeStyle(stroke: CanvasStroke): string {
  // Demonstrations render green, prompts blue.
  return stroke.mode === "demonstration" ? "#2e8b57" : "#1e6fd9";
}

function drawStroke(stroke: CanvasStroke): void {
  if (stroke.points.length < 2) return;
  ctx.beginPath();
  ctx.moveTo(stroke.points[0].x, stroke.points[0].y);
  for (const p of stroke.points.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.strokeStyle = strokeStyle(stroke);
  ctx.lineWidth = 3;
  ctx.lineCap = "round";
  ctx.stroke();
}

function drawOverlay(geometry: OverlayGeometry): void {
  ctx.strokeStyle = "rgba(230, 126, 34, 0.75)";
  ctx.lineCap = "round";
  for (const seg of geometry.segments) {
    ctx.beginPath();
    ctx.lineWidth = seg.width;
    ctx.moveTo(seg.x1, seg.y1);
    ctx.lineTo(seg.x2, seg.y2);
    ctx.stroke();
  }
  if (geometry.marker) {
    const { kind, x, y } = geometry.marker;
    ctx.beginPath();
    ctx.fillStyle =
      kind === "end" ? "#2e8b57" : kind === "warning" ? "#e6a817" : "#d14343";
    ctx.arc(x, y, 7, 0, 2 * Math.PI);
    ctx.fill();
    if (kind !== "end") {
      ctx.fillStyle = "#fff";
      ctx.font = "bold 10px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(kind === "warning" ? "!" : "×", x, y + 3.5);
    }
  }
}

function redraw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const stroke of finishedStrokes) drawStroke(stroke);
  if (currentStroke) drawStroke(currentStroke);
  if (overlay) drawOverlay(overlay);
}

function updateBadge(status: ClassificationStatus | null): void {
  lastStatus = status;
  badge.textContent = status === null ? "idle" : badgeText(status);
  badge.classList.toggle("ambiguous", status?.ambiguous ?? false);
}

function addSkillToSidebar(skillId: string): void {
  const item = document.createElement("li");
  item.textContent = skillId;
  skillList.append(item);
}

function newPromptBatcher(): PointBatcher<ClassificationStatus> {
  const b = new PointBatcher<ClassificationStatus>(
    (points: WorldPoint[]) => client.sendPromptPoints(points),
    50,
  );
  b.onResult = (status) => updateBadge(status);
  b.onConnectionChange = (connected) => {
    banner.hidden = connected;
  };
  return b;
}

function pointerPoint(event: PointerEvent): StrokePoint {
  const rect = canvas.getBoundingClientRect();
  return {
    t: event.timeStamp,
    x: event.clientX - rect.left,
    y: event.clientY - rect.top,
  };
}

canvas.addEventListener("pointerdown", (event) => {
  drawing = true;
  canvas.setPointerCapture(event.pointerId);
  currentStroke = { points: [pointerPoint(event)], mode };
  if (mode === "prompt") {
    overlay = null;
    batcher = newPromptBatcher();
    batcher.start();
    const first = currentStroke.points[0];
    promptAnchor = { x: first.x, y: first.y };
  }
  redraw();
});

canvas.addEventListener("pointermove", (event) => {
  if (!drawing || !currentStroke) return;
  const point = pointerPoint(event);
  currentStroke.points.push(point);
  if (mode === "prompt" && batcher) {
    const t0 = currentStroke.points[0].t;
    batcher.add({
      t: (point.t - t0) / 1000,
      x: (point.x - scale.originPx.x) * scale.metersPerPixel,
      y: (scale.originPx.y - point.y) * scale.metersPerPixel,
    });
  }
  redraw();
});

canvas.addEventListener("pointerup", () => {
  if (!drawing || !currentStroke) return;
  drawing = false;
  finishedStrokes.push(currentStroke);
  const stroke = currentStroke;
  currentStroke = null;
  if (stroke.mode === "demonstration") {
    void submitDemonstration(stroke);
  }
  redraw();
});

async function submitDemonstration(stroke: CanvasStroke): Promise<void> {
  try {
    const points = strokeToWorld(stroke.points, scale);
    const label = `sketch_${skillList.childElementCount + 1}`;
    const skillId = await client.submitDemonstration(points, label);
    addSkillToSidebar(skillId);
    toast(`learned skill ${skillId}`);
  } catch (error) {
    finishedStrokes.pop();
    redraw();
    toast(error instanceof ServiceError ? error.message : String(error));
  }
}

finishButton.addEventListener("click", () => void finalize());

async function finalize(): Promise<void> {
  if (!batcher) {
    toast("draw a prompt first");
    return;
  }
  try {
    batcher.stop();
    await batcher.drain();
    const rollout = await client.finalizePrompt();
    overlay = buildOverlay(rollout, scale, promptAnchor ?? undefined);
    redraw();
    if (rollout.trailer.stop_reason !== "triggered") {
      toast(`stopped: ${rollout.trailer.stop_reason}`);
    }
  } catch (error) {
    toast(error instanceof ServiceError ? error.message : String(error));
  } finally {
    batcher = null;
  }
}

async function boot(): Promise<void> {
  try {
    await client.createSession();
    updateBadge(lastStatus);
    toast("session ready");
  } catch (error) {
    banner.hidden = false;
    toast(`cannot reach service at ${SERVICE_URL}: ${String(error)}`);
  }
}

void boot();
setMode("demonstration");
redraw();

// Exposed for the console and quick inspection while developing.
(window as unknown as Record<string, unknown>).studio = {
  client,
  worldToPx: (x: number, y: number) => worldToPx(x, y, scale),
};
