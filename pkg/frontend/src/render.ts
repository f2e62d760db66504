/**
 * Canvas painting for the two orthographic views. All geometry comes from
 * the pure helpers in view.ts; this module only touches the 2D context.
 */
import type { TelemetryFrame } from "./protocol";
import {
  hintArrowTop,
  lengthPx,
  makeCamera,
  planeTraceSide,
  planeTraceTop,
  toPx,
  type Camera,
  type ObstacleDoc,
} from "./view";

const COLORS = {
  background: "#10141a",
  grid: "#1d242e",
  drone: "#e8eef5",
  guard: "#49c0ff",
  guardDamaged: "#ff5d5d",
  buffer: "#2a6c55",
  obstacle: "#8d97a5",
  human: "#ffb02e",
  ground: "#4d5964",
  hint: "#ff5d5d",
  text: "#aeb9c6",
};

export interface SceneConfig {
  obstacles: ObstacleDoc[];
  humanBufferM: number;
  pxPerMeter: number;
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera): void {
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const step = cam.pxPerMeter;
  const offsetX = ((cam.width / 2 - cam.centerX * cam.pxPerMeter) % step + step) % step;
  const offsetY = ((cam.height / 2 + cam.centerYorZ * cam.pxPerMeter) % step + step) % step;
  for (let x = offsetX; x < cam.width; x += step) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, cam.height);
    ctx.stroke();
  }
  for (let y = offsetY; y < cam.height; y += step) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(cam.width, y);
    ctx.stroke();
  }
}

function drawDroneIcon(ctx: CanvasRenderingContext2D, at: { x: number; y: number }, armPx: number): void {
  ctx.strokeStyle = COLORS.drone;
  ctx.lineWidth = 2;
  for (const angle of [Math.PI / 4, (3 * Math.PI) / 4]) {
    ctx.beginPath();
    ctx.moveTo(at.x - armPx * Math.cos(angle), at.y - armPx * Math.sin(angle));
    ctx.lineTo(at.x + armPx * Math.cos(angle), at.y + armPx * Math.sin(angle));
    ctx.stroke();
  }
  for (const sx of [-1, 1]) {
    for (const sy of [-1, 1]) {
      ctx.beginPath();
      ctx.arc(
        at.x + sx * armPx * Math.SQRT1_2,
        at.y + sy * armPx * Math.SQRT1_2,
        armPx * 0.35,
        0,
        2 * Math.PI,
      );
      ctx.stroke();
    }
  }
}

function circle(
  ctx: CanvasRenderingContext2D,
  at: { x: number; y: number },
  radiusPx: number,
  stroke: string,
  dash: number[] = [],
): void {
  ctx.strokeStyle = stroke;
  ctx.setLineDash(dash);
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(at.x, at.y, Math.max(radiusPx, 0), 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
}

export function renderTopView(
  ctx: CanvasRenderingContext2D,
  frame: TelemetryFrame | null,
  scene: SceneConfig,
  width: number,
  height: number,
  connected: boolean,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  const [dx, dy] = frame ? [frame.position[0], frame.position[1]] : [0, 0];
  const cam = makeCamera(width, height, dx, dy, scene.pxPerMeter);
  drawGrid(ctx, cam);

  for (const obs of scene.obstacles) {
    if (obs.shape === "plane") {
      const seg = planeTraceTop(cam, obs);
      if (!seg) continue;
      ctx.strokeStyle = obs.tag === "ground" ? COLORS.ground : COLORS.obstacle;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(seg.from.x, seg.from.y);
      ctx.lineTo(seg.to.x, seg.to.y);
      ctx.stroke();
    } else if (obs.shape === "sphere") {
      const at = toPx(cam, obs.center[0], obs.center[1]);
      circle(ctx, at, lengthPx(cam, obs.radius), obs.tag === "human" ? COLORS.human : COLORS.obstacle);
    } else {
      const at = toPx(cam, obs.center[0], obs.center[1]);
      const hw = lengthPx(cam, obs.half_extents[0]);
      const hh = lengthPx(cam, obs.half_extents[1]);
      ctx.strokeStyle = COLORS.obstacle;
      ctx.strokeRect(at.x - hw, at.y - hh, 2 * hw, 2 * hh);
    }
  }

  const at = toPx(cam, dx, dy);
  if (frame) {
    // buffer zone around the guard, then the guard itself, to scale
    circle(ctx, at, lengthPx(cam, frame.guard_radius + scene.humanBufferM), COLORS.buffer, [6, 6]);
    circle(ctx, at, lengthPx(cam, frame.guard_radius), frame.damaged ? COLORS.guardDamaged : COLORS.guard);
    for (const hint of frame.contacts) {
      const arrow = hintArrowTop(cam, dx, dy, hint.azimuth_rad, frame.guard_radius, 0.25);
      ctx.strokeStyle = COLORS.hint;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(arrow.from.x, arrow.from.y);
      ctx.lineTo(arrow.to.x, arrow.to.y);
      ctx.stroke();
    }
  }
  drawDroneIcon(ctx, at, lengthPx(cam, 0.225));

  if (!connected) {
    ctx.fillStyle = "rgba(16, 20, 26, 0.75)";
    ctx.fillRect(0, 0, width, height);
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("disconnected - reconnecting", width / 2, height / 2);
  }
}

export function renderSideView(
  ctx: CanvasRenderingContext2D,
  frame: TelemetryFrame | null,
  scene: SceneConfig,
  width: number,
  height: number,
  connected: boolean,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  const [dx, dz] = frame ? [frame.position[0], frame.position[2]] : [0, 1];
  const cam = makeCamera(width, height, dx, Math.max(dz, 0.8), scene.pxPerMeter);
  drawGrid(ctx, cam);

  for (const obs of scene.obstacles) {
    if (obs.shape === "plane") {
      const seg = planeTraceSide(cam, obs);
      if (!seg) continue;
      ctx.strokeStyle = obs.tag === "ground" ? COLORS.ground : COLORS.obstacle;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(seg.from.x, seg.from.y);
      ctx.lineTo(seg.to.x, seg.to.y);
      ctx.stroke();
    } else if (obs.shape === "sphere") {
      const at = toPx(cam, obs.center[0], obs.center[2]);
      circle(ctx, at, lengthPx(cam, obs.radius), obs.tag === "human" ? COLORS.human : COLORS.obstacle);
    }
  }

  const at = toPx(cam, dx, dz);
  if (frame) {
    circle(ctx, at, lengthPx(cam, frame.guard_radius), frame.damaged ? COLORS.guardDamaged : COLORS.guard);
  }
  drawDroneIcon(ctx, at, lengthPx(cam, 0.225));

  if (!connected) {
    ctx.fillStyle = "rgba(16, 20, 26, 0.75)";
    ctx.fillRect(0, 0, width, height);
  }
}
