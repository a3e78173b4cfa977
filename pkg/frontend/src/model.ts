/**
 * Render model: the single mutable object the animation loop draws from.
 *
 * All truth comes off the wire. Reloading the page mid-episode simply
 * reconnects and resumes from the next hello + tick, so nothing here is
 * persisted locally.
 */

import { Phase, Scene, ServerMsg, TickMsg, Vec3 } from "./protocol.js";

export interface EpisodeSummary {
  success: boolean;
  ticks: number;
  collisions: number;
}

export interface RenderModel {
  connected: boolean;
  schemaVersion: number | null;
  phase: Phase;
  scene: Scene | null;
  lastTick: TickMsg | null;
  demoPath: Vec3[]; // last recorded demonstration, echoed by the server
  lastEvent: string | null;
  lastError: string | null;
  episode: EpisodeSummary | null;
  correctionsApplied: number;
}

export function emptyModel(): RenderModel {
  return {
    connected: false,
    schemaVersion: null,
    phase: "idle",
    scene: null,
    lastTick: null,
    demoPath: [],
    lastEvent: null,
    lastError: null,
    episode: null,
    correctionsApplied: 0,
  };
}

/** Fold one server message into the model. Unknown types are ignored so an
 * older client keeps rendering against a newer server. */
export function applyMessage(model: RenderModel, msg: ServerMsg): RenderModel {
  switch (msg.type) {
    case "hello":
      model.schemaVersion = msg.version;
      model.scene = msg.scene;
      break;
    case "scene":
      model.scene = msg.scene;
      model.lastTick = null;
      model.episode = null;
      model.lastEvent = null;
      break;
    case "phase":
      model.phase = msg.phase;
      break;
    case "tick":
      model.lastTick = msg;
      if (msg.event !== "normal") {
        model.lastEvent = msg.event;
      }
      break;
    case "event":
      model.lastEvent = msg.event;
      break;
    case "demo_recorded":
      model.demoPath = msg.path;
      break;
    case "correction_applied":
      model.correctionsApplied += 1;
      break;
    case "episode_end":
      model.episode = {
        success: msg.success,
        ticks: msg.ticks,
        collisions: msg.collisions,
      };
      break;
    case "error":
      model.lastError = msg.message;
      break;
    default:
      break;
  }
  return model;
}

/** Feedback is legal only while an episode runs (the server enforces the
 * same rule; checking here avoids a round trip for the error toast). */
export function canSendFeedback(model: RenderModel): boolean {
  return model.phase === "executing" || model.phase === "correcting";
}

export function canDraw(model: RenderModel): boolean {
  return model.phase === "demonstrating";
}

/**
 * Radius of the uncertainty halo around the end effector, in pixels.
 *
 * Strictly increasing in sigma, compressed with a square root so the halo
 * stays readable across the few orders of magnitude the GP variance spans.
 */
export function haloRadiusPx(sigma: number, pxPerMeter: number): number {
  const base = 4;
  return base + Math.sqrt(Math.max(sigma, 0)) * pxPerMeter;
}
