/**
 * Pixel/meter projection for the top-down canvas.
 *
 * World x points into the container (toward the back wall) and is drawn
 * upward on screen; world y is drawn to the right with the sign flipped so
 * that the robot's left appears on the viewer's left. The scale is uniform
 * in both axes and chosen so the world bounds fit the canvas with a small
 * margin, which keeps rectangles square and makes the inverse exact.
 */

import { Scene, Vec2, Vec3 } from "./protocol.js";

export class Viewport {
  readonly scale: number; // px per meter
  private readonly x0: number;
  private readonly y0: number;

  constructor(
    readonly bounds: { min: Vec2; max: Vec2 },
    readonly widthPx: number,
    readonly heightPx: number,
    marginPx = 20,
  ) {
    const spanX = bounds.max[0] - bounds.min[0];
    const spanY = bounds.max[1] - bounds.min[1];
    if (spanX <= 0 || spanY <= 0) {
      throw new Error("degenerate world bounds");
    }
    // world y maps to the horizontal pixel axis, world x to the vertical
    this.scale = Math.min(
      (widthPx - 2 * marginPx) / spanY,
      (heightPx - 2 * marginPx) / spanX,
    );
    if (this.scale <= 0) {
      throw new Error("canvas too small for the margin");
    }
    // center the world box in the canvas
    this.x0 = (widthPx - this.scale * spanY) / 2;
    this.y0 = (heightPx - this.scale * spanX) / 2;
  }

  /** World meters (x toward back wall, y lateral) to canvas pixels. */
  toPixel(world: Vec2): Vec2 {
    const px = this.x0 + (this.bounds.max[1] - world[1]) * this.scale;
    const py = this.y0 + (this.bounds.max[0] - world[0]) * this.scale;
    return [px, py];
  }

  /** Canvas pixels back to world meters; exact inverse of toPixel. */
  toWorld(pixel: Vec2): Vec2 {
    const wy = this.bounds.max[1] - (pixel[0] - this.x0) / this.scale;
    const wx = this.bounds.max[0] - (pixel[1] - this.y0) / this.scale;
    return [wx, wy];
  }

  /** Length conversion for radii and rectangle extents. */
  toPixels(meters: number): number {
    return meters * this.scale;
  }
}

export function viewportForScene(
  scene: Scene,
  widthPx: number,
  heightPx: number,
): Viewport {
  return new Viewport(scene.bounds, widthPx, heightPx);
}

/** Canvas points live on the slot plane; lift them to 3D for the wire. */
export function liftToPlane(world: Vec2, planeZ: number): Vec3 {
  return [world[0], world[1], planeZ];
}
