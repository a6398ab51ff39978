import { LmapClient } from "./api.js";
import { brushSelect } from "./brush.js";
import {
  multiply,
  orbitView,
  perspective,
  type Mat4,
  type Orbit,
} from "./camera.js";
import { bakeVertexColors } from "./colormap.js";
import { runAndCompare } from "./controller.js";
import { drawHistogram } from "./histogram.js";
import { computeVertexNormals, MeshRenderer } from "./render/gl.js";
import {
  applyBrush,
  canRun,
  clearSelection,
  initialState,
  loadMesh,
  parsedResult,
  setDisplay,
  setOverlay,
  setShading,
  type DisplayMode,
  type OverlayMode,
  type ShadingMode,
  type ViewerState,
} from "./state.js";
import type { MeshPayload, MetricsPayload } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const canvas = el<HTMLCanvasElement>("viewport");
const histArea = el<HTMLCanvasElement>("hist-area");
const histAngle = el<HTMLCanvasElement>("hist-angle");
const banner = el<HTMLDivElement>("banner");
const statsLine = el<HTMLDivElement>("stats");
const runButton = el<HTMLButtonElement>("run");
const fileInput = el<HTMLInputElement>("mesh-file");
const serverInput = el<HTMLInputElement>("server-url");
const radiusInput = el<HTMLInputElement>("brush-radius");
const stepsInput = el<HTMLInputElement>("steps");
const stepsLabel = el<HTMLSpanElement>("steps-label");
const brushModeSelect = el<HTMLSelectElement>("brush-mode");
const overlaySelect = el<HTMLSelectElement>("overlay");
const shadingSelect = el<HTMLSelectElement>("shading");
const displaySelect = el<HTMLSelectElement>("display");

const gl = canvas.getContext("webgl");
if (!gl) throw new Error("WebGL unavailable");
const renderer = new MeshRenderer(gl);

let st: ViewerState = initialState();
let client = new LmapClient(serverInput.value);
let curvature: number[] | null = null;
let originalNormals: Float32Array | null = null;
let orbit: Orbit = { theta: -1.2, phi: 0.9, distance: 30, target: [0, 0, 0] };

function setState(next: ViewerState): void {
  st = next;
  syncControls();
  requestDraw();
}

function syncControls(): void {
  runButton.disabled = !canRun(st);
  banner.textContent = st.error ?? (st.job === "done" ? "" : "");
  banner.className = st.error ? "banner error" : "banner";
  if (st.job === "pending" || st.job === "running") {
    runButton.textContent = `running (${st.job})`;
  } else {
    runButton.textContent = "flatten selection";
  }
  const bits: string[] = [];
  if (st.mesh) {
    bits.push(`${st.vertexCount} vertices, ${st.mesh.faces.length / 3} faces`);
  }
  bits.push(`${st.selection.size} selected`);
  if (st.roiStats) {
    bits.push(`interior ${st.roiStats.interior_count}, rim ${st.roiStats.rim_count}`);
  }
  const result = parsedResult(st);
  if (result) {
    bits.push(
      `max |K| after: ${result.report.final_curvature.interior_max_abs.toExponential(2)}`,
    );
  }
  statsLine.textContent = bits.join(" | ");
  drawHistograms();
}

function drawHistograms(): void {
  const ctxA = histArea.getContext("2d");
  const ctxE = histAngle.getContext("2d");
  if (!ctxA || !ctxE) return;
  ctxA.clearRect(0, 0, histArea.width, histArea.height);
  ctxE.clearRect(0, 0, histAngle.width, histAngle.height);
  if (!st.metricsRaw) return;
  const metrics = JSON.parse(st.metricsRaw) as MetricsPayload;
  drawHistogram(ctxA, metrics.area_eps.hist, histArea.width, histArea.height, "#d4814a");
  drawHistogram(ctxE, metrics.angle_eta.hist, histAngle.width, histAngle.height, "#4a7fd4");
}

function overlayValues(mode: OverlayMode): Map<number, number> | null {
  if (mode === "curvature" && curvature) {
    return new Map(curvature.map((v, i) => [i, v]));
  }
  if ((mode === "area_eps" || mode === "angle_eta") && st.metricsRaw) {
    const metrics = JSON.parse(st.metricsRaw) as MetricsPayload;
    const source = mode === "area_eps" ? metrics.area_eps : null;
    if (source) {
      return new Map(source.vertex_ids.map((id, k) => [id, source.values[k]]));
    }
    const eta = metrics.angle_eta;
    return new Map(eta.vertex_ids.map((id, k) => [id, eta.vertex_mean_abs[k]]));
  }
  return null;
}

function fitOrbit(mesh: MeshPayload): void {
  let lo = [Infinity, Infinity, Infinity];
  let hi = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < mesh.positions.length; i += 3) {
    for (let a = 0; a < 3; a++) {
      lo[a] = Math.min(lo[a], mesh.positions[i + a]);
      hi[a] = Math.max(hi[a], mesh.positions[i + a]);
    }
  }
  const size = Math.max(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], 1);
  orbit = {
    theta: -1.2,
    phi: 0.9,
    distance: size * 1.6,
    target: [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2],
  };
}

function currentMvp(width: number, height: number): Mat4 {
  const proj = perspective(Math.PI / 4, width / height, 0.01, 1e4);
  return multiply(proj, orbitView(orbit));
}

let drawQueued = false;
function requestDraw(): void {
  if (drawQueued) return;
  drawQueued = true;
  requestAnimationFrame(() => {
    drawQueued = false;
    draw();
  });
}

function meshBuffers(mesh: MeshPayload): {
  positions: Float32Array;
  faces: Uint32Array;
} {
  return {
    positions: new Float32Array(mesh.positions),
    faces: new Uint32Array(mesh.faces),
  };
}

function draw(): void {
  renderer.clear();
  if (!st.mesh) return;
  const colors = bakeVertexColors(st.vertexCount, overlayValues(st.overlay), st.selection);
  const width = canvas.width;
  const height = canvas.height;
  const result = parsedResult(st);

  const panes: { mesh: MeshPayload; x: number; w: number; deformed: boolean }[] = [];
  if (st.display === "original" || !result) {
    panes.push({ mesh: st.mesh, x: 0, w: width, deformed: false });
  } else if (st.display === "deformed") {
    panes.push({ mesh: result, x: 0, w: width, deformed: true });
  } else {
    panes.push({ mesh: st.mesh, x: 0, w: width / 2, deformed: false });
    panes.push({ mesh: result, x: width / 2, w: width / 2, deformed: true });
  }

  for (const pane of panes) {
    const { positions, faces } = meshBuffers(pane.mesh);
    // original-normal-mapped shading lights the deformed geometry with the
    // input mesh's normals so shape changes stand out
    const normals =
      pane.deformed && st.shading === "original-normals" && originalNormals
        ? originalNormals
        : computeVertexNormals(positions, faces);
    renderer.setMesh(positions, faces, normals);
    renderer.setColors(colors);
    const mvp = currentMvp(pane.w, height);
    renderer.draw(mvp, { x: pane.x, y: 0, w: pane.w, h: height });
  }
}

async function handleUpload(file: File): Promise<void> {
  try {
    const text = await file.text();
    client = new LmapClient(serverInput.value);
    const stats = await client.uploadMesh(text);
    const mesh = await client.meshJson(stats.id);
    curvature = (await client.curvature(stats.id)).values;
    originalNormals = computeVertexNormals(
      new Float32Array(mesh.positions),
      new Uint32Array(mesh.faces),
    );
    fitOrbit(mesh);
    setState(loadMesh(st, stats.id, mesh));
    statsLine.textContent = `v=${stats.v} f=${stats.f} chi=${stats.chi}`;
  } catch (err) {
    setState({ ...st, error: err instanceof Error ? err.message : String(err) });
  }
}

// -- pointer interaction: left drag brushes, right drag orbits ---------------

let dragging: "brush" | "orbit" | null = null;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("contextmenu", (e) => e.preventDefault());

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  lastX = e.offsetX;
  lastY = e.offsetY;
  dragging = e.button === 2 || e.shiftKey ? "orbit" : "brush";
  if (dragging === "brush") brushAt(e.offsetX, e.offsetY);
});

canvas.addEventListener("pointermove", (e) => {
  if (dragging === "orbit") {
    orbit = {
      ...orbit,
      theta: orbit.theta - (e.offsetX - lastX) * 0.01,
      phi: Math.max(
        -1.4,
        Math.min(1.4, orbit.phi + (e.offsetY - lastY) * 0.01),
      ),
    };
    lastX = e.offsetX;
    lastY = e.offsetY;
    requestDraw();
  } else if (dragging === "brush") {
    brushAt(e.offsetX, e.offsetY);
  }
});

canvas.addEventListener("pointerup", () => {
  dragging = null;
});

canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  orbit = { ...orbit, distance: orbit.distance * (e.deltaY > 0 ? 1.1 : 0.9) };
  requestDraw();
});

function brushAt(px: number, py: number): void {
  if (!st.mesh || st.job === "pending" || st.job === "running") return;
  // brushing applies to the original pane (left half in split view)
  const paneWidth = st.display === "split" && st.resultRaw ? canvas.width / 2 : canvas.width;
  if (px > paneWidth) return;
  const mvp = currentMvp(paneWidth, canvas.height);
  const hit = brushSelect(
    st.mesh.positions,
    mvp,
    paneWidth,
    canvas.height,
    px,
    py,
    Number(radiusInput.value),
  );
  if (hit.picked === null) return;
  setState(applyBrush(st, hit.ids, brushModeSelect.value as "add" | "remove"));
}

// -- control wiring -----------------------------------------------------------

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (file) void handleUpload(file);
});

runButton.addEventListener("click", () => {
  st.steps = Number(stepsInput.value);
  void runAndCompare(st, {
    client,
    onState: (s) => setState(s),
  }).then((s) => setState(s));
});

el<HTMLButtonElement>("clear").addEventListener("click", () => {
  setState(clearSelection(st));
});

stepsInput.addEventListener("input", () => {
  stepsLabel.textContent = stepsInput.value;
});

overlaySelect.addEventListener("change", () =>
  setState(setOverlay(st, overlaySelect.value as OverlayMode)),
);
shadingSelect.addEventListener("change", () =>
  setState(setShading(st, shadingSelect.value as ShadingMode)),
);
displaySelect.addEventListener("change", () =>
  setState(setDisplay(st, displaySelect.value as DisplayMode)),
);

syncControls();
requestDraw();
