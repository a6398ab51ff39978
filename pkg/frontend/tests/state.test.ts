import { describe, expect, it } from "vitest";

import {
  applyBrush,
  canRun,
  clearSelection,
  initialState,
  jobFailed,
  jobFinished,
  jobStarted,
  loadMesh,
  setDisplay,
  setOverlay,
  setShading,
} from "../src/state.js";
import type { MeshPayload, RoiStats } from "../src/types.js";

const quad: MeshPayload = {
  positions: [0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0],
  faces: [0, 1, 2, 0, 2, 3],
};

const roiStats: RoiStats = { size: 3, interior_count: 1, rim_count: 2 };

function loaded() {
  return loadMesh(initialState(), "abc", quad);
}

describe("viewer state", () => {
  it("loads a mesh and clears prior work", () => {
    let st = loaded();
    st = applyBrush(st, [0, 1]);
    st = jobFinished(st, "{}", "{}");
    st = loadMesh(st, "xyz", quad);
    expect(st.meshId).toBe("xyz");
    expect(st.selection.size).toBe(0);
    expect(st.resultRaw).toBeNull();
    expect(st.metricsRaw).toBeNull();
    expect(st.job).toBe("none");
  });

  it("brushes add and remove", () => {
    let st = loaded();
    st = applyBrush(st, [0, 1, 2], "add");
    expect([...st.selection].sort()).toEqual([0, 1, 2]);
    st = applyBrush(st, [1], "remove");
    expect(st.selection.has(1)).toBe(false);
    expect(st.selection.size).toBe(2);
  });

  it("ignores out-of-range vertices", () => {
    let st = loaded();
    st = applyBrush(st, [0, 4, -1, 99], "add");
    expect([...st.selection]).toEqual([0]);
  });

  it("view-mode toggles leave selection and results alone", () => {
    let st = loaded();
    st = applyBrush(st, [0, 2]);
    st = jobFinished(st, '{"a":1}', '{"b":2}');
    const selection = new Set(st.selection);
    st = setOverlay(st, "curvature");
    st = setShading(st, "original-normals");
    st = setDisplay(st, "deformed");
    expect(st.selection).toEqual(selection);
    expect(st.resultRaw).toBe('{"a":1}');
    expect(st.metricsRaw).toBe('{"b":2}');
  });

  it("gates the run button", () => {
    let st = initialState();
    expect(canRun(st)).toBe(false);
    st = loaded();
    expect(canRun(st)).toBe(false); // empty selection
    st = applyBrush(st, [0]);
    expect(canRun(st)).toBe(true);
    const running = jobStarted(st, roiStats);
    expect(canRun(running)).toBe(false);
  });

  it("clearing the selection disables the run", () => {
    let st = applyBrush(loaded(), [0, 1]);
    st = clearSelection(st);
    expect(canRun(st)).toBe(false);
  });

  it("failure keeps mesh and selection for a retry", () => {
    let st = applyBrush(loaded(), [0, 1]);
    st = jobFailed(st, "connection error: refused");
    expect(st.error).toContain("refused");
    expect(st.meshId).toBe("abc");
    expect(st.selection.size).toBe(2);
    expect(canRun(st)).toBe(true);
  });
});
