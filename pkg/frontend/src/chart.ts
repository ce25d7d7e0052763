import { Curve } from "./aggregate";
import { Raster } from "./png";

export interface Series {
  label: string;
  curve: Curve;
  color: [number, number, number];
}

export const PALETTE: [number, number, number][] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
];

// 3x5 glyphs, rows top to bottom, 3 bits per row (MSB left).
const FONT: Record<string, number[]> = {
  "0": [7, 5, 5, 5, 7], "1": [2, 6, 2, 2, 7], "2": [7, 1, 7, 4, 7],
  "3": [7, 1, 3, 1, 7], "4": [5, 5, 7, 1, 1], "5": [7, 4, 7, 1, 7],
  "6": [7, 4, 7, 5, 7], "7": [7, 1, 2, 2, 2], "8": [7, 5, 7, 5, 7],
  "9": [7, 5, 7, 1, 7], "-": [0, 0, 7, 0, 0], ".": [0, 0, 0, 0, 2],
  "+": [0, 2, 7, 2, 0], " ": [0, 0, 0, 0, 0], "_": [0, 0, 0, 0, 7],
  A: [2, 5, 7, 5, 5], B: [6, 5, 6, 5, 6], C: [3, 4, 4, 4, 3],
  D: [6, 5, 5, 5, 6], E: [7, 4, 6, 4, 7], F: [7, 4, 6, 4, 4],
  G: [3, 4, 5, 5, 3], H: [5, 5, 7, 5, 5], I: [7, 2, 2, 2, 7],
  J: [1, 1, 1, 5, 2], K: [5, 6, 4, 6, 5], L: [4, 4, 4, 4, 7],
  M: [5, 7, 7, 5, 5], N: [5, 7, 7, 7, 5], O: [2, 5, 5, 5, 2],
  P: [6, 5, 6, 4, 4], Q: [2, 5, 5, 7, 3], R: [6, 5, 6, 6, 5],
  S: [3, 4, 2, 1, 6], T: [7, 2, 2, 2, 2], U: [5, 5, 5, 5, 7],
  V: [5, 5, 5, 5, 2], W: [5, 5, 7, 7, 5], X: [5, 5, 2, 5, 5],
  Y: [5, 5, 2, 2, 2], Z: [7, 1, 2, 4, 7],
};

export function drawText(raster: Raster, x: number, y: number, text: string,
                         rgb: [number, number, number] = [40, 40, 40]): void {
  let cx = x;
  for (const raw of text.toUpperCase()) {
    const glyph = FONT[raw] ?? FONT[" "];
    for (let r = 0; r < 5; r++) {
      for (let c = 0; c < 3; c++) {
        if ((glyph[r] >> (2 - c)) & 1) raster.set(cx + c, y + r, rgb);
      }
    }
    cx += 4;
  }
}

function formatTick(v: number): string {
  const a = Math.abs(v);
  if (a >= 1_000_000) return `${+(v / 1_000_000).toFixed(1)}M`;
  if (a >= 10_000) return `${+(v / 1000).toFixed(0)}K`;
  if (a >= 100) return `${Math.round(v)}`;
  return `${+v.toFixed(2)}`;
}

export function renderChart(series: Series[], width = 640, height = 400,
                            title = ""): Raster {
  if (series.length === 0) throw new Error("nothing to plot");
  const raster = new Raster(width, height);
  const left = 52;
  const right = width - 14;
  const top = 26;
  const bottom = height - 34;

  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.curve.frames.length; i++) {
      xMin = Math.min(xMin, s.curve.frames[i]);
      xMax = Math.max(xMax, s.curve.frames[i]);
      yMin = Math.min(yMin, s.curve.mean[i] - s.curve.std[i]);
      yMax = Math.max(yMax, s.curve.mean[i] + s.curve.std[i]);
    }
  }
  if (xMax === xMin) xMax = xMin + 1;
  if (yMax === yMin) yMax = yMin + 1;
  const pad = 0.05 * (yMax - yMin);
  yMin -= pad;
  yMax += pad;

  const px = (x: number) => left + ((x - xMin) / (xMax - xMin)) * (right - left);
  const py = (y: number) => bottom - ((y - yMin) / (yMax - yMin)) * (bottom - top);

  // Gridlines and tick labels.
  for (let i = 0; i <= 4; i++) {
    const gx = xMin + ((xMax - xMin) * i) / 4;
    const gy = yMin + ((yMax - yMin) * i) / 4;
    raster.line(px(gx), top, px(gx), bottom, [225, 225, 225]);
    raster.line(left, py(gy), right, py(gy), [225, 225, 225]);
    drawText(raster, px(gx) - 8, bottom + 6, formatTick(gx));
    drawText(raster, 8, py(gy) - 2, formatTick(gy));
  }
  // Axes.
  raster.line(left, top, left, bottom, [60, 60, 60]);
  raster.line(left, bottom, right, bottom, [60, 60, 60]);
  drawText(raster, left, height - 12, "FRAMES");
  drawText(raster, 8, 8, "MEAN REWARD");
  if (title) drawText(raster, Math.max(left, (width - 4 * title.length) / 2), 8, title);

  for (const s of series) {
    // Std band first so every line stays visible on top of it.
    for (let i = 0; i < s.curve.frames.length; i++) {
      const x = px(s.curve.frames[i]);
      const lo = py(s.curve.mean[i] - s.curve.std[i]);
      const hi = py(s.curve.mean[i] + s.curve.std[i]);
      raster.fillRect(x, Math.min(lo, hi), x, Math.max(lo, hi), s.color, 0.18);
    }
    for (let i = 1; i < s.curve.frames.length; i++) {
      raster.line(px(s.curve.frames[i - 1]), py(s.curve.mean[i - 1]),
                  px(s.curve.frames[i]), py(s.curve.mean[i]), s.color, 2);
    }
  }

  // Legend block, top-left inside the plot area.
  let ly = top + 6;
  for (const s of series) {
    raster.fillRect(left + 8, ly, left + 20, ly + 4, s.color);
    drawText(raster, left + 26, ly, `${s.label} (${s.curve.runs} RUNS)`);
    ly += 10;
  }
  return raster;
}
