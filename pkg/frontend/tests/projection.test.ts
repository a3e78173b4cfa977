import { describe, expect, it } from "vitest";

import { Viewport } from "../src/projection.js";
import { Vec2 } from "../src/protocol.js";

const BOUNDS = { min: [0.72, -0.2] as Vec2, max: [0.86, 0.1] as Vec2 };

describe("Viewport", () => {
  it("round-trips world points through pixels within 1 px worth of meters", () => {
    const vp = new Viewport(BOUNDS, 640, 480);
    for (let i = 0; i < 500; i++) {
      const w: Vec2 = [
        BOUNDS.min[0] + ((BOUNDS.max[0] - BOUNDS.min[0]) * i) / 499,
        BOUNDS.min[1] + ((BOUNDS.max[1] - BOUNDS.min[1]) * ((i * 7) % 500)) / 499,
      ];
      const back = vp.toWorld(vp.toPixel(w));
      expect(Math.abs(back[0] - w[0]) * vp.scale).toBeLessThan(1e-9);
      expect(Math.abs(back[1] - w[1]) * vp.scale).toBeLessThan(1e-9);
    }
  });

  it("round-trips pixel points exactly as well", () => {
    const vp = new Viewport(BOUNDS, 640, 480);
    for (let px = 0; px < 640; px += 13) {
      for (let py = 0; py < 480; py += 17) {
        const [qx, qy] = vp.toPixel(vp.toWorld([px, py]));
        expect(Math.abs(qx - px)).toBeLessThan(1e-9);
        expect(Math.abs(qy - py)).toBeLessThan(1e-9);
      }
    }
  });

  it("uses one uniform scale for both axes", () => {
    const vp = new Viewport(BOUNDS, 640, 480);
    const o = vp.toPixel([0.8, 0.0]);
    const dx = vp.toPixel([0.81, 0.0]);
    const dy = vp.toPixel([0.8, 0.01]);
    const lenX = Math.hypot(dx[0] - o[0], dx[1] - o[1]);
    const lenY = Math.hypot(dy[0] - o[0], dy[1] - o[1]);
    expect(lenX).toBeCloseTo(lenY, 9);
    expect(lenX).toBeCloseTo(vp.toPixels(0.01), 9);
  });

  it("keeps the world box inside the canvas", () => {
    const vp = new Viewport(BOUNDS, 640, 480);
    for (const corner of [
      BOUNDS.min,
      BOUNDS.max,
      [BOUNDS.min[0], BOUNDS.max[1]] as Vec2,
      [BOUNDS.max[0], BOUNDS.min[1]] as Vec2,
    ]) {
      const [px, py] = vp.toPixel(corner);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(640);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(480);
    }
  });

  it("draws the back wall above the approach on screen", () => {
    // larger world x (deeper in the container) means smaller pixel y
    const vp = new Viewport(BOUNDS, 640, 480);
    const near = vp.toPixel([0.74, -0.05]);
    const deep = vp.toPixel([0.82, -0.05]);
    expect(deep[1]).toBeLessThan(near[1]);
  });

  it("rejects degenerate bounds", () => {
    expect(
      () => new Viewport({ min: [0, 0], max: [0, 1] }, 640, 480),
    ).toThrow();
  });
});
