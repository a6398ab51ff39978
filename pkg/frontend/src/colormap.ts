// Diverging blue-white-red map for signed scalars (curvature, log ratios)
// and helpers to bake per-vertex overlay colors.

export type Rgb = [number, number, number];

export function divergingColor(value: number, lo: number, hi: number): Rgb {
  if (!Number.isFinite(value)) return [0.55, 0.55, 0.55];
  const span = Math.max(Math.abs(lo), Math.abs(hi), 1e-12);
  const t = Math.max(-1, Math.min(1, value / span));
  if (t < 0) {
    const s = 1 + t; // 0 at -1, 1 at 0
    return [0.2 + 0.8 * s, 0.35 + 0.65 * s, 1.0];
  }
  const s = 1 - t;
  return [1.0, 0.35 + 0.65 * s, 0.2 + 0.8 * s];
}

export const SELECTION_COLOR: Rgb = [0.15, 0.85, 0.3];
export const BASE_COLOR: Rgb = [0.78, 0.78, 0.82];

/** Per-vertex colors from an overlay (sparse or dense), with the current
 * selection painted on top. */
export function bakeVertexColors(
  vertexCount: number,
  overlayValues: Map<number, number> | null,
  selection: Set<number>,
): Float32Array {
  const colors = new Float32Array(vertexCount * 3);
  let lo = 0;
  let hi = 0;
  if (overlayValues) {
    for (const v of overlayValues.values()) {
      if (!Number.isFinite(v)) continue;
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  for (let i = 0; i < vertexCount; i++) {
    let rgb: Rgb = BASE_COLOR;
    if (overlayValues && overlayValues.has(i)) {
      rgb = divergingColor(overlayValues.get(i)!, lo, hi);
    }
    if (selection.has(i)) rgb = SELECTION_COLOR;
    colors[i * 3] = rgb[0];
    colors[i * 3 + 1] = rgb[1];
    colors[i * 3 + 2] = rgb[2];
  }
  return colors;
}
