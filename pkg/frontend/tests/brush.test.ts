import { describe, expect, it } from "vitest";

import { brushSelect, pickVertex, projectVertices } from "../src/brush.js";
import { orthographic } from "../src/camera.js";

// 5x5 unit grid in the z=0 plane, viewed top-down with an orthographic
// camera mapping x,y in [0,4] onto a 400x400 screen
const N = 5;
const positions: number[] = [];
for (let j = 0; j < N; j++) {
  for (let i = 0; i < N; i++) {
    positions.push(i, j, 0);
  }
}
const mvp = orthographic(0, 4, 0, 4, -1, 1);
const W = 400;
const H = 400;

function screenOf(i: number, j: number): [number, number] {
  // vertex (i, j) lands at (i/4 * 400, 400 - j/4 * 400)
  return [(i / 4) * W, H - (j / 4) * H];
}

describe("projection", () => {
  it("maps grid corners to screen corners", () => {
    const proj = projectVertices(positions, mvp, W, H);
    expect(proj.data[0]).toBeCloseTo(0); // vertex (0,0) -> x=0
    expect(proj.data[1]).toBeCloseTo(H); // y down
    const last = (N * N - 1) * 3;
    expect(proj.data[last]).toBeCloseTo(W);
    expect(proj.data[last + 1]).toBeCloseTo(0);
  });
});

describe("picking", () => {
  it("picks the nearest vertex", () => {
    const proj = projectVertices(positions, mvp, W, H);
    const [sx, sy] = screenOf(2, 2);
    expect(pickVertex(proj, sx + 3, sy - 3, 50)).toBe(2 * N + 2);
  });

  it("prefers the front-most vertex on overlap", () => {
    const twoDeep = [0, 0, 0.5, 0, 0, -0.5]; // same screen point, z differs
    const proj = projectVertices(twoDeep, orthographic(-1, 1, -1, 1, -1, 1), 100, 100);
    // camera looks down -z: larger z is closer, i.e. smaller ndc depth
    expect(pickVertex(proj, 50, 50, 10)).toBe(0);
  });

  it("returns null on a miss", () => {
    const proj = projectVertices(positions, mvp, W, H);
    expect(pickVertex(proj, -300, -300, 10)).toBeNull();
  });
});

describe("brushSelect", () => {
  it("radius zero toggles exactly the nearest vertex", () => {
    const [sx, sy] = screenOf(1, 1);
    const hit = brushSelect(positions, mvp, W, H, sx + 2, sy + 2, 0);
    expect(hit.ids).toEqual([N + 1]);
  });

  it("a larger brush collects a screen-space disk", () => {
    const [sx, sy] = screenOf(2, 2);
    // one grid cell is 100 px; radius 110 reaches the 4-neighborhood
    const hit = brushSelect(positions, mvp, W, H, sx, sy, 110);
    const expected = [2 * N + 2, 2 * N + 1, 2 * N + 3, N + 2, 3 * N + 2];
    expect(new Set(hit.ids)).toEqual(new Set(expected));
  });

  it("is a no-op off the mesh", () => {
    const hit = brushSelect(positions, mvp, W, H, -500, -500, 30);
    expect(hit.picked).toBeNull();
    expect(hit.ids).toEqual([]);
  });

  it("depth band excludes the far side", () => {
    // two stacked grids; brush should only take the near layer
    const layered = [...positions];
    for (let j = 0; j < N; j++) {
      for (let i = 0; i < N; i++) layered.push(i, j, -0.8);
    }
    const [sx, sy] = screenOf(2, 2);
    const hit = brushSelect(layered, mvp, W, H, sx, sy, 110, { depthBand: 0.1 });
    expect(hit.ids.every((id) => id < N * N)).toBe(true);
    expect(hit.ids.length).toBeGreaterThan(0);
  });
});
