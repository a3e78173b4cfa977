/**
 * Canvas drawing for the top-down scene. All functions are stateless: they
 * take the render model, a viewport and a 2D context and paint one frame.
 */

import { haloRadiusPx, RenderModel } from "./model.js";
import { Viewport } from "./projection.js";
import { RectData, Vec2, Vec3 } from "./protocol.js";

const COLORS = {
  background: "#f7f5f0",
  wall: "#8d8478",
  container: "#ffffff",
  placed: "#d9c7a7",
  carton: "#c88a4b",
  ee: "#2b5797",
  attractor: "#2b579755",
  halo: "#2b579722",
  goal: "#3a8a3a",
  demo: "#b03030",
  stroke: "#b0303088",
};

function drawRect(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  rect: RectData,
  fill: string,
): void {
  const [cx, cy] = vp.toPixel(rect.center);
  // world y spans the horizontal pixel axis, world x the vertical
  const wpx = vp.toPixels(2 * rect.half[1]);
  const hpx = vp.toPixels(2 * rect.half[0]);
  ctx.fillStyle = fill;
  ctx.fillRect(cx - wpx / 2, cy - hpx / 2, wpx, hpx);
}

function drawPath(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  points: Vec3[],
  color: string,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  const [x0, y0] = vp.toPixel([points[0][0], points[0][1]]);
  ctx.moveTo(x0, y0);
  for (const p of points.slice(1)) {
    const [x, y] = vp.toPixel([p[0], p[1]]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function drawDot(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  world: Vec2,
  radiusPx: number,
  color: string,
): void {
  const [x, y] = vp.toPixel(world);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, radiusPx, 0, 2 * Math.PI);
  ctx.fill();
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  model: RenderModel,
  livePixels: Vec2[] = [],
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, vp.widthPx, vp.heightPx);
  const scene = model.scene;
  if (!scene) return;

  drawRect(ctx, vp, scene.container, COLORS.container);
  for (const wall of scene.walls) drawRect(ctx, vp, wall, COLORS.wall);
  for (const placed of scene.placed_cartons) drawRect(ctx, vp, placed, COLORS.placed);
  drawDot(ctx, vp, [scene.goal[0], scene.goal[1]], 5, COLORS.goal);

  drawPath(ctx, vp, model.demoPath, COLORS.demo);
  if (livePixels.length >= 2) {
    ctx.strokeStyle = COLORS.stroke;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(livePixels[0][0], livePixels[0][1]);
    for (const p of livePixels.slice(1)) ctx.lineTo(p[0], p[1]);
    ctx.stroke();
  }

  const tick = model.lastTick;
  if (tick) {
    const ee: Vec2 = [tick.position[0], tick.position[1]];
    const carton: RectData = {
      center: [
        ee[0] + scene.grasp_offset[0],
        ee[1] + scene.grasp_offset[1],
      ],
      half: scene.carton_half,
    };
    drawRect(ctx, vp, carton, COLORS.carton);
    drawDot(ctx, vp, ee, haloRadiusPx(tick.sigma, vp.scale), COLORS.halo);
    drawDot(ctx, vp, ee, 4, COLORS.ee);
    const attractor: Vec2 = [
      ee[0] + tick.attractor_distance[0],
      ee[1] + tick.attractor_distance[1],
    ];
    drawDot(ctx, vp, attractor, 3, COLORS.attractor);
  }
}

export function statusLine(model: RenderModel): string {
  const conn = model.connected ? "connected" : "disconnected";
  const parts = [`${conn} | phase: ${model.phase}`];
  if (model.lastTick) {
    parts.push(`t=${model.lastTick.time.toFixed(2)}s`);
    parts.push(`fx=${model.lastTick.wrench[0].toFixed(2)}N`);
  }
  if (model.lastEvent) parts.push(`event: ${model.lastEvent}`);
  if (model.episode) {
    parts.push(
      `episode: ${model.episode.success ? "success" : "failed"} ` +
        `(${model.episode.ticks} ticks, ${model.episode.collisions} collisions)`,
    );
  }
  if (model.lastError) parts.push(`error: ${model.lastError}`);
  return parts.join("  ");
}
