/**
 * Demonstration strokes: pointer samples turned into timed demo points.
 *
 * Points are captured in canvas pixels, projected to world meters, clamped
 * to the container interior (you cannot demonstrate through a wall) and
 * stamped with the elapsed wall time since the stroke began.
 */

import { Viewport } from "./projection.js";
import { Scene, Vec2, Vec3 } from "./protocol.js";

export interface DemoPoint {
  t: number;
  position: Vec3;
  clamped: boolean;
}

export function clampToContainer(world: Vec2, scene: Scene): { point: Vec2; clamped: boolean } {
  const c = scene.container.center;
  const h = scene.container.half;
  const x = Math.max(c[0] - h[0], Math.min(c[0] + h[0], world[0]));
  const y = Math.max(c[1] - h[1], Math.min(c[1] + h[1], world[1]));
  const clamped = x !== world[0] || y !== world[1];
  return { point: [x, y], clamped };
}

export class StrokeRecorder {
  private points: DemoPoint[] = [];
  private t0: number | null = null;
  private lastT = -1;

  constructor(
    private readonly viewport: Viewport,
    private readonly scene: Scene,
  ) {}

  /** Add one pointer sample; returns the demo point, or null when the
   * timestamp did not advance (duplicate pointer events). */
  add(pixel: Vec2, nowMs: number): DemoPoint | null {
    if (this.t0 === null) {
      this.t0 = nowMs;
    }
    const t = (nowMs - this.t0) / 1000;
    if (t <= this.lastT) {
      return null;
    }
    this.lastT = t;
    const { point, clamped } = clampToContainer(this.viewport.toWorld(pixel), this.scene);
    const demo: DemoPoint = {
      t,
      position: [point[0], point[1], this.scene.start[2]],
      clamped,
    };
    this.points.push(demo);
    return demo;
  }

  finish(): DemoPoint[] {
    return this.points;
  }

  get size(): number {
    return this.points.length;
  }
}
