import { transformPoint, type Mat4 } from "./camera.js";

export interface ProjectedVertices {
  /** per vertex: screen x, screen y (pixels, y down), ndc depth */
  data: Float64Array;
  count: number;
}

export function projectVertices(
  positions: ArrayLike<number>,
  mvp: Mat4,
  width: number,
  height: number,
): ProjectedVertices {
  const count = Math.floor(positions.length / 3);
  const data = new Float64Array(count * 3);
  for (let i = 0; i < count; i++) {
    const [cx, cy, cz, cw] = transformPoint(
      mvp,
      positions[i * 3],
      positions[i * 3 + 1],
      positions[i * 3 + 2],
    );
    if (cw <= 1e-12) {
      data[i * 3] = Number.NaN;
      data[i * 3 + 1] = Number.NaN;
      data[i * 3 + 2] = Number.POSITIVE_INFINITY;
      continue;
    }
    data[i * 3] = ((cx / cw) * 0.5 + 0.5) * width;
    data[i * 3 + 1] = (0.5 - (cy / cw) * 0.5) * height;
    data[i * 3 + 2] = cz / cw;
  }
  return { data, count };
}

/** Front-most vertex within pickRadius pixels of the pointer, or null.
 * Ties break toward the smaller depth, then the smaller index. */
export function pickVertex(
  projected: ProjectedVertices,
  px: number,
  py: number,
  pickRadius: number,
): number | null {
  let best: number | null = null;
  let bestDepth = Number.POSITIVE_INFINITY;
  let bestDist = Number.POSITIVE_INFINITY;
  for (let i = 0; i < projected.count; i++) {
    const dx = projected.data[i * 3] - px;
    const dy = projected.data[i * 3 + 1] - py;
    const dist = Math.hypot(dx, dy);
    if (dist > pickRadius) continue;
    const depth = projected.data[i * 3 + 2];
    if (depth < bestDepth - 1e-12 || (Math.abs(depth - bestDepth) <= 1e-12 && dist < bestDist)) {
      best = i;
      bestDepth = depth;
      bestDist = dist;
    }
  }
  return best;
}

export interface BrushHit {
  picked: number | null;
  ids: number[];
}

/** Vertices inside the screen-space brush around the picked surface point.
 *
 * A brush of radius 0 yields just the nearest vertex. The depth band keeps
 * the brush from grabbing the far side of the surface. A miss is a no-op.
 */
export function brushSelect(
  positions: ArrayLike<number>,
  mvp: Mat4,
  width: number,
  height: number,
  px: number,
  py: number,
  radiusPx: number,
  options: { pickRadius?: number; depthBand?: number } = {},
): BrushHit {
  const pickRadius = options.pickRadius ?? Math.max(radiusPx, 12);
  const depthBand = options.depthBand ?? 0.05;
  const projected = projectVertices(positions, mvp, width, height);
  const picked = pickVertex(projected, px, py, pickRadius);
  if (picked === null) return { picked: null, ids: [] };
  if (radiusPx <= 0) return { picked, ids: [picked] };

  const pickedDepth = projected.data[picked * 3 + 2];
  const ids: number[] = [];
  for (let i = 0; i < projected.count; i++) {
    const dx = projected.data[i * 3] - px;
    const dy = projected.data[i * 3 + 1] - py;
    if (Math.hypot(dx, dy) > radiusPx) continue;
    if (Math.abs(projected.data[i * 3 + 2] - pickedDepth) > depthBand) continue;
    ids.push(i);
  }
  return { picked, ids };
}
