/**
 * Wire types for the teaching server's JSON protocol, schema version 1.
 *
 * The server speaks newline-free JSON objects over a websocket; every
 * message carries a "type" field. Inbound (server to client) and outbound
 * (client to server) message sets are disjoint.
 */

export const SCHEMA_VERSION = 1;

export type Vec2 = [number, number];
export type Vec3 = [number, number, number];

export interface RectData {
  center: Vec2;
  half: Vec2;
}

/** Scene geometry from the handshake: everything needed to draw the
 * top-down view and set up the pixel/meter projection. */
export interface Scene {
  preset: string;
  bounds: { min: Vec2; max: Vec2 };
  container: RectData;
  placed_cartons: RectData[];
  walls: RectData[];
  carton_half: Vec2;
  grasp_offset: Vec2;
  dt: number;
  start: Vec3;
  goal: Vec3;
}

export type Phase = "idle" | "demonstrating" | "executing" | "correcting";

export interface TickMsg {
  type: "tick";
  time: number;
  position: Vec3;
  attractor_distance: Vec3;
  stiffness: Vec3;
  sigma: number;
  wrench: number[];
  event: string;
}

export type ServerMsg =
  | { type: "hello"; version: number; scene: Scene }
  | { type: "phase"; phase: Phase }
  | { type: "scene"; scene: Scene }
  | TickMsg
  | { type: "event"; event: string; time: number }
  | { type: "demo_recorded"; samples: number; path: Vec3[] }
  | { type: "trained"; points: number }
  | { type: "policy_loaded" }
  | { type: "classifier_loaded" }
  | { type: "correction_applied"; offsets: number[] }
  | { type: "episode_end"; success: boolean; ticks: number; collisions: number }
  | { type: "stopped" }
  | { type: "error"; message: string };

export type ClientMsg =
  | { type: "start_demo" }
  | { type: "demo_point"; t: number; position: Vec3 }
  | { type: "end_demo" }
  | { type: "train"; seed?: number }
  | {
      type: "start_episode";
      preset?: string;
      mode?: "ilosa" | "accifr";
      seed?: number;
      monitor?: Record<string, number>;
    }
  | { type: "feedback"; offsets: Vec3 }
  | { type: "stop" };

/** Parse one frame off the wire; throws on anything that is not a typed
 * JSON object. */
export function parseServerMsg(raw: string): ServerMsg {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error(`not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof data !== "object" || data === null || !("type" in data)) {
    throw new Error("message without a type field");
  }
  return data as ServerMsg;
}

/** Correction offsets are normalized per axis; anything larger than a unit
 * drag still maps to at most 1 in magnitude. */
export function clampOffsets(v: Vec3): Vec3 {
  return [
    Math.max(-1, Math.min(1, v[0])),
    Math.max(-1, Math.min(1, v[1])),
    Math.max(-1, Math.min(1, v[2])),
  ];
}
