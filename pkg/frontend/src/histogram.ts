import type { HistogramData } from "./types.js";

export interface Bar {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Bar geometry for a histogram in a width x height box (pure, testable). */
export function histogramBars(
  hist: HistogramData,
  width: number,
  height: number,
  pad = 2,
): Bar[] {
  const n = hist.counts.length;
  if (n === 0) return [];
  const peak = Math.max(1, ...hist.counts);
  const barW = (width - 2 * pad) / n;
  const bars: Bar[] = [];
  for (let i = 0; i < n; i++) {
    const h = ((height - 2 * pad) * hist.counts[i]) / peak;
    bars.push({
      x: pad + i * barW,
      y: height - pad - h,
      w: Math.max(barW - 1, 1),
      h,
    });
  }
  return bars;
}

export function drawHistogram(
  ctx: CanvasRenderingContext2D,
  hist: HistogramData,
  width: number,
  height: number,
  color = "#4a7fd4",
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = color;
  for (const bar of histogramBars(hist, width, height)) {
    ctx.fillRect(bar.x, bar.y, bar.w, bar.h);
  }
  // zero marker if the range spans it
  const lo = hist.edges[0];
  const hi = hist.edges[hist.edges.length - 1];
  if (lo < 0 && hi > 0) {
    const x = ((0 - lo) / (hi - lo)) * width;
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
}
