/**
 * Thin session client: owns the socket, feeds the render model, exposes
 * typed send helpers. The socket is injected through a minimal interface so
 * tests can drive the client with a node websocket or a fake.
 */

import { applyMessage, emptyModel, RenderModel } from "./model.js";
import { ClientMsg, clampOffsets, parseServerMsg, ServerMsg, Vec3 } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

export class TeachClient {
  readonly model: RenderModel = emptyModel();
  onUpdate: ((model: RenderModel, msg: ServerMsg | null) => void) | null = null;

  constructor(private readonly socket: SocketLike) {
    socket.onopen = () => {
      this.model.connected = true;
      this.onUpdate?.(this.model, null);
    };
    socket.onclose = () => {
      this.model.connected = false;
      this.onUpdate?.(this.model, null);
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMsg(String(ev.data));
      applyMessage(this.model, msg);
      this.onUpdate?.(this.model, msg);
    };
  }

  send(msg: ClientMsg): void {
    this.socket.send(JSON.stringify(msg));
  }

  startDemo(): void {
    this.send({ type: "start_demo" });
  }

  demoPoint(t: number, position: Vec3): void {
    this.send({ type: "demo_point", t, position });
  }

  endDemo(): void {
    this.send({ type: "end_demo" });
  }

  train(seed = 0): void {
    this.send({ type: "train", seed });
  }

  startEpisode(
    preset = "training",
    mode: "ilosa" | "accifr" = "ilosa",
    seed = 0,
    monitor?: Record<string, number>,
  ): void {
    this.send({ type: "start_episode", preset, mode, seed, monitor });
  }

  /** Directional correction; offsets are clamped to [-1, 1] per axis. */
  feedback(offsets: Vec3): void {
    this.send({ type: "feedback", offsets: clampOffsets(offsets) });
  }

  stop(): void {
    this.send({ type: "stop" });
  }

  close(): void {
    this.socket.close();
  }
}
