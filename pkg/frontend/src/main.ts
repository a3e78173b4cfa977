/**
 * Browser entry point: wires the websocket client, pointer input and the
 * animation-frame render loop to the DOM.
 *
 * Mouse drag in the demonstrating phase draws the demonstration; during
 * execution a drag from the end effector becomes a directional correction,
 * as do the arrow keys (PageUp/PageDown cover the third axis).
 */

import { TeachClient } from "./client.js";
import { canDraw, canSendFeedback } from "./model.js";
import { Viewport, viewportForScene } from "./projection.js";
import { renderFrame, statusLine } from "./render.js";
import { Vec2, Vec3 } from "./protocol.js";
import { StrokeRecorder } from "./stroke.js";

const CANVAS_W = 640;
const CANVAS_H = 480;
const FEEDBACK_PERIOD_MS = 100;

function connect(): TeachClient {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${proto}://${location.host}/session`);
  return new TeachClient(ws as never);
}

function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  canvas.width = CANVAS_W;
  canvas.height = CANVAS_H;
  const ctx = canvas.getContext("2d")!;
  const status = document.getElementById("status")!;
  const client = connect();

  let viewport: Viewport | null = null;
  let stroke: StrokeRecorder | null = null;
  let livePixels: Vec2[] = [];
  let dragStart: Vec2 | null = null;
  const heldKeys = new Set<string>();

  client.onUpdate = (model) => {
    if (model.scene && !viewport) {
      viewport = viewportForScene(model.scene, CANVAS_W, CANVAS_H);
    }
    if (model.scene && viewport && model.scene.bounds !== viewport.bounds) {
      viewport = viewportForScene(model.scene, CANVAS_W, CANVAS_H);
    }
  };

  const pixelOf = (ev: MouseEvent): Vec2 => {
    const r = canvas.getBoundingClientRect();
    return [ev.clientX - r.left, ev.clientY - r.top];
  };

  canvas.addEventListener("mousedown", (ev) => {
    const model = client.model;
    if (!viewport || !model.scene) return;
    if (canDraw(model)) {
      stroke = new StrokeRecorder(viewport, model.scene);
      livePixels = [];
    } else if (canSendFeedback(model)) {
      dragStart = pixelOf(ev);
    }
  });

  canvas.addEventListener("mousemove", (ev) => {
    if (stroke && viewport) {
      const px = pixelOf(ev);
      const point = stroke.add(px, performance.now());
      if (point) {
        livePixels.push(px);
        client.demoPoint(point.t, point.position);
        if (point.clamped) {
          status.classList.add("warning");
          setTimeout(() => status.classList.remove("warning"), 400);
        }
      }
    }
  });

  canvas.addEventListener("mouseup", (ev) => {
    if (stroke) {
      stroke = null;
      client.endDemo();
    } else if (dragStart && viewport) {
      // drag vector in world meters, normalized by a 2 cm full-scale drag
      const end = pixelOf(ev);
      const a = viewport.toWorld(dragStart);
      const b = viewport.toWorld(end);
      const full = 0.02;
      client.feedback([(b[0] - a[0]) / full, (b[1] - a[1]) / full, 0]);
      dragStart = null;
    }
  });

  window.addEventListener("keydown", (ev) => heldKeys.add(ev.key));
  window.addEventListener("keyup", (ev) => heldKeys.delete(ev.key));
  setInterval(() => {
    if (!canSendFeedback(client.model) || heldKeys.size === 0) return;
    const v: Vec3 = [0, 0, 0];
    if (heldKeys.has("ArrowUp")) v[0] += 1;
    if (heldKeys.has("ArrowDown")) v[0] -= 1;
    if (heldKeys.has("ArrowLeft")) v[1] -= 1;
    if (heldKeys.has("ArrowRight")) v[1] += 1;
    if (heldKeys.has("PageUp")) v[2] += 1;
    if (heldKeys.has("PageDown")) v[2] -= 1;
    if (v.some((x) => x !== 0)) client.feedback(v);
  }, FEEDBACK_PERIOD_MS);

  const button = (id: string, fn: () => void) =>
    document.getElementById(id)!.addEventListener("click", fn);
  button("start-demo", () => client.startDemo());
  button("train", () => client.train());
  button("run-ilosa", () => client.startEpisode("training", "ilosa"));
  button("stop", () => client.stop());

  const frame = () => {
    if (viewport) renderFrame(ctx, viewport, client.model, livePixels);
    status.textContent = statusLine(client.model);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main();
