import type { JobPhase, MeshPayload, ResultPayload, RoiStats } from "./types.js";

export type OverlayMode = "none" | "curvature" | "area_eps" | "angle_eta";
export type ShadingMode = "standard" | "original-normals";
export type DisplayMode = "original" | "deformed" | "split";
export type BrushMode = "add" | "remove";

export interface ViewerState {
  meshId: string | null;
  mesh: MeshPayload | null;
  vertexCount: number;
  selection: Set<number>;
  roiStats: RoiStats | null;
  brushRadius: number;
  brushMode: BrushMode;
  overlay: OverlayMode;
  shading: ShadingMode;
  display: DisplayMode;
  steps: number;
  job: JobPhase;
  error: string | null;
  // raw payload text is the single source of truth for everything shown
  resultRaw: string | null;
  metricsRaw: string | null;
}

export function initialState(): ViewerState {
  return {
    meshId: null,
    mesh: null,
    vertexCount: 0,
    selection: new Set(),
    roiStats: null,
    brushRadius: 24,
    brushMode: "add",
    overlay: "none",
    shading: "standard",
    display: "original",
    steps: 5,
    job: "none",
    error: null,
    resultRaw: null,
    metricsRaw: null,
  };
}

export function loadMesh(
  state: ViewerState,
  meshId: string,
  mesh: MeshPayload,
): ViewerState {
  return {
    ...state,
    meshId,
    mesh,
    vertexCount: mesh.positions.length / 3,
    selection: new Set(),
    roiStats: null,
    job: "none",
    error: null,
    resultRaw: null,
    metricsRaw: null,
    display: "original",
  };
}

/** Toggle the given vertices in or out of the selection; ids outside the
 * loaded mesh are ignored so the selection invariant holds. */
export function applyBrush(
  state: ViewerState,
  ids: Iterable<number>,
  mode: BrushMode = state.brushMode,
): ViewerState {
  const selection = new Set(state.selection);
  for (const id of ids) {
    if (!Number.isInteger(id) || id < 0 || id >= state.vertexCount) continue;
    if (mode === "add") selection.add(id);
    else selection.delete(id);
  }
  return { ...state, selection, roiStats: null };
}

export function clearSelection(state: ViewerState): ViewerState {
  return { ...state, selection: new Set(), roiStats: null };
}

export function setOverlay(state: ViewerState, overlay: OverlayMode): ViewerState {
  return { ...state, overlay };
}

export function setShading(state: ViewerState, shading: ShadingMode): ViewerState {
  return { ...state, shading };
}

export function setDisplay(state: ViewerState, display: DisplayMode): ViewerState {
  return { ...state, display };
}

export function canRun(state: ViewerState): boolean {
  return (
    state.meshId !== null &&
    state.selection.size > 0 &&
    state.job !== "pending" &&
    state.job !== "running"
  );
}

export function jobStarted(state: ViewerState, roiStats: RoiStats): ViewerState {
  return { ...state, roiStats, job: "pending", error: null };
}

export function jobRunning(state: ViewerState): ViewerState {
  return { ...state, job: "running" };
}

export function jobFinished(
  state: ViewerState,
  resultRaw: string,
  metricsRaw: string,
): ViewerState {
  return {
    ...state,
    job: "done",
    error: null,
    resultRaw,
    metricsRaw,
    display: "split",
  };
}

/** Failure keeps mesh and selection so the user can retry. */
export function jobFailed(state: ViewerState, error: string): ViewerState {
  return { ...state, job: "failed", error };
}

export function parsedResult(state: ViewerState): ResultPayload | null {
  return state.resultRaw === null
    ? null
    : (JSON.parse(state.resultRaw) as ResultPayload);
}
