import { readFileSync } from "fs";
import { parse as parseCSV } from "papaparse";

export interface MetricsRow {
  wall_time_s: number;
  frames: number;
  updates: number;
  mean_reward: number;
  std_reward: number;
  episodes: number;
}

export interface Run {
  label: string;
  rows: MetricsRow[];
}

export interface Curve {
  frames: number[];
  mean: number[];
  std: number[];
  runs: number;
}

const REQUIRED = [
  "wall_time_s",
  "frames",
  "updates",
  "mean_reward",
  "std_reward",
  "episodes",
];

export function readMetricsCSV(path: string): MetricsRow[] {
  const parsed = parseCSV<Record<string, number>>(readFileSync(path, "utf8").trim(), {
    header: true,
    dynamicTyping: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column '${col}'`);
    }
  }
  const rows = parsed.data as unknown as MetricsRow[];
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
  for (const row of rows) {
    if (!Number.isFinite(row.frames) || !Number.isFinite(row.mean_reward)) {
      throw new Error(`${path}: non-numeric frames/mean_reward row`);
    }
  }
  return rows;
}

/** Linear interpolation of (frames, mean_reward) at frame x.
 *  Callers must keep x within [first, last] frame of the run. */
export function interpolate(rows: MetricsRow[], x: number): number {
  if (x <= rows[0].frames) return rows[0].mean_reward;
  for (let i = 1; i < rows.length; i++) {
    if (x <= rows[i].frames) {
      const a = rows[i - 1];
      const b = rows[i];
      if (b.frames === a.frames) return b.mean_reward;
      const t = (x - a.frames) / (b.frames - a.frames);
      return a.mean_reward + t * (b.mean_reward - a.mean_reward);
    }
  }
  return rows[rows.length - 1].mean_reward;
}

export function mean(xs: number[]): number {
  if (xs.length === 0) throw new Error("mean of empty list");
  let s = 0;
  for (const x of xs) s += x;
  return s / xs.length;
}

/** Population standard deviation (divides by n, matching the producer side). */
export function std(xs: number[]): number {
  const m = mean(xs);
  let s = 0;
  for (const x of xs) s += (x - m) * (x - m);
  return Math.sqrt(s / xs.length);
}

/** Centered moving average with an odd window; window 1 is the identity. */
export function smooth(xs: number[], window: number): number[] {
  if (window < 1 || window % 2 === 0) {
    throw new Error(`smoothing window must be odd and >= 1, got ${window}`);
  }
  if (window === 1) return xs.slice();
  const half = (window - 1) / 2;
  const out = new Array<number>(xs.length);
  for (let i = 0; i < xs.length; i++) {
    const lo = Math.max(0, i - half);
    const hi = Math.min(xs.length - 1, i + half);
    out[i] = mean(xs.slice(lo, hi + 1));
  }
  return out;
}

/** Put every run on a shared frame grid (clipped to the shortest run) and
 *  reduce across runs to a mean curve with a standard deviation band. */
export function aggregate(runs: MetricsRow[][], points = 100, window = 1): Curve {
  if (runs.length === 0) throw new Error("no runs to aggregate");
  const start = Math.max(...runs.map((r) => r[0].frames));
  const end = Math.min(...runs.map((r) => r[r.length - 1].frames));
  if (end < start) throw new Error("runs do not overlap in frames");
  const n = Math.max(2, points);
  const frames: number[] = [];
  const meanOut: number[] = [];
  const stdOut: number[] = [];
  for (let i = 0; i < n; i++) {
    const x = start + ((end - start) * i) / (n - 1);
    const values = runs.map((r) => interpolate(r, x));
    frames.push(x);
    meanOut.push(mean(values));
    stdOut.push(std(values));
  }
  return {
    frames,
    mean: smooth(meanOut, window),
    std: smooth(stdOut, window),
    runs: runs.length,
  };
}

export function curveToCSV(curve: Curve): string {
  const lines = ["frames,mean_reward,std_reward"];
  for (let i = 0; i < curve.frames.length; i++) {
    lines.push(`${curve.frames[i]},${curve.mean[i]},${curve.std[i]}`);
  }
  return lines.join("\n") + "\n";
}
