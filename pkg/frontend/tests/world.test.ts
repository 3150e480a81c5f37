import { describe, expect, it } from "vitest";

import { DEFAULT_SCALE, pxToWorld, strokeToWorld, worldToPx } from "../src/world.js";

const scale = { ...DEFAULT_SCALE, originPx: { x: 500, y: 350 } };

describe("world scale", () => {
  it("maps 100 px to 0.1 m", () => {
    const world = pxToWorld({ t: 0, x: 600, y: 350 }, scale, 0);
    expect(world.x).toBeCloseTo(0.1, 12);
    expect(world.y).toBeCloseTo(0.0, 12);
  });

  it("flips the y axis", () => {
    const world = pxToWorld({ t: 0, x: 500, y: 250 }, scale, 0);
    expect(world.y).toBeCloseTo(0.1, 12);
  });

  it("round trips within 0.5 px", () => {
    for (let i = 0; i < 500; i++) {
      const x = Math.random() * 1000;
      const y = Math.random() * 700;
      const world = pxToWorld({ t: 0, x, y }, scale, 0);
      const back = worldToPx(world.x, world.y, scale);
      expect(Math.abs(back.x - x)).toBeLessThan(0.5);
      expect(Math.abs(back.y - y)).toBeLessThan(0.5);
    }
  });

  it("rebases stroke time to seconds from the first point", () => {
    const world = strokeToWorld(
      [
        { t: 1000, x: 500, y: 350 },
        { t: 1050, x: 510, y: 350 },
        { t: 1100, x: 520, y: 350 },
      ],
      scale,
    );
    expect(world.map((p) => p.t)).toEqual([0, 0.05, 0.1]);
  });

  it("handles empty strokes", () => {
    expect(strokeToWorld([], scale)).toEqual([]);
  });
});
