import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import {
  aggregate, curveToCSV, interpolate, mean, MetricsRow, readMetricsCSV, smooth, std,
} from "../src/aggregate";

function rows(points: [number, number][]): MetricsRow[] {
  return points.map(([frames, reward], i) => ({
    wall_time_s: i,
    frames,
    updates: i + 1,
    mean_reward: reward,
    std_reward: 0,
    episodes: i,
  }));
}

function writeCSV(dir: string, name: string, points: [number, number][]): string {
  const path = join(dir, name);
  const lines = ["wall_time_s,frames,updates,mean_reward,std_reward,episodes"];
  points.forEach(([frames, reward], i) => {
    lines.push(`${i},${frames},${i + 1},${reward},0,${i}`);
  });
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}

describe("mean and std", () => {
  it("matches hand-computed values to 1e-9", () => {
    expect(mean([1, 2, 3, 4])).toBeCloseTo(2.5, 12);
    // Population std of (2, 4, 4, 4, 5, 5, 7, 9) is exactly 2.
    expect(std([2, 4, 4, 4, 5, 5, 7, 9])).toBeCloseTo(2.0, 9);
    expect(std([3.7, 3.7, 3.7])).toBeCloseTo(0.0, 12);
    // mean(1.1, 2.2, 3.3) = 2.2; std = sqrt((1.21+0+1.21)/3)
    expect(mean([1.1, 2.2, 3.3])).toBeCloseTo(2.2, 9);
    expect(std([1.1, 2.2, 3.3])).toBeCloseTo(Math.sqrt(2.42 / 3), 9);
  });

  it("rejects the empty list", () => {
    expect(() => mean([])).toThrow();
  });
});

describe("interpolate", () => {
  const run = rows([[0, 0], [100, 10], [200, 30]]);

  it("is exact at knots", () => {
    expect(interpolate(run, 0)).toBe(0);
    expect(interpolate(run, 100)).toBe(10);
    expect(interpolate(run, 200)).toBe(30);
  });

  it("is linear between knots", () => {
    expect(interpolate(run, 50)).toBeCloseTo(5, 12);
    expect(interpolate(run, 150)).toBeCloseTo(20, 12);
    expect(interpolate(run, 175)).toBeCloseTo(25, 12);
  });
});

describe("smooth", () => {
  it("window 1 is the identity", () => {
    expect(smooth([3, 1, 4, 1, 5], 1)).toEqual([3, 1, 4, 1, 5]);
  });

  it("window 3 averages neighbors with shrinking edges", () => {
    const out = smooth([0, 3, 6, 9], 3);
    expect(out[0]).toBeCloseTo(1.5, 12); // mean(0, 3)
    expect(out[1]).toBeCloseTo(3, 12);   // mean(0, 3, 6)
    expect(out[2]).toBeCloseTo(6, 12);
    expect(out[3]).toBeCloseTo(7.5, 12);
  });

  it("rejects even windows", () => {
    expect(() => smooth([1, 2], 2)).toThrow();
  });
});

describe("aggregate", () => {
  it("computes cross-seed mean and std to 1e-9", () => {
    const runs = [
      rows([[0, 1], [100, 3]]),
      rows([[0, 2], [100, 5]]),
      rows([[0, 3], [100, 7]]),
    ];
    const curve = aggregate(runs, 3);
    expect(curve.frames).toEqual([0, 50, 100]);
    expect(curve.runs).toBe(3);
    // At 50 frames the runs interpolate to 2, 3.5, 5.
    expect(curve.mean[0]).toBeCloseTo(2, 9);
    expect(curve.mean[1]).toBeCloseTo(3.5, 9);
    expect(curve.mean[2]).toBeCloseTo(5, 9);
    expect(curve.std[0]).toBeCloseTo(Math.sqrt(2 / 3), 9);
    expect(curve.std[1]).toBeCloseTo(Math.sqrt(1.5), 9);
    expect(curve.std[2]).toBeCloseTo(Math.sqrt(8 / 3), 9);
  });

  it("clips the grid to the shortest run", () => {
    const runs = [
      rows([[0, 0], [300, 3]]),
      rows([[50, 1], [200, 4]]),
    ];
    const curve = aggregate(runs, 4);
    expect(curve.frames[0]).toBe(50);
    expect(curve.frames[curve.frames.length - 1]).toBe(200);
  });

  it("rejects non-overlapping runs", () => {
    expect(() => aggregate([rows([[0, 0], [10, 1]]), rows([[20, 0], [30, 1]])])).toThrow();
  });
});

describe("readMetricsCSV", () => {
  it("round-trips a producer-format file", () => {
    const dir = mkdtempSync(join(tmpdir(), "agg-"));
    const path = writeCSV(dir, "run.csv", [[160, 0.5], [320, 1.25]]);
    const run = readMetricsCSV(path);
    expect(run.length).toBe(2);
    expect(run[0].frames).toBe(160);
    expect(run[1].mean_reward).toBeCloseTo(1.25, 12);
  });

  it("rejects a file missing required columns", () => {
    const dir = mkdtempSync(join(tmpdir(), "agg-"));
    const path = join(dir, "bad.csv");
    writeFileSync(path, "frames,score\n1,2\n");
    expect(() => readMetricsCSV(path)).toThrow(/missing column/);
  });

  it("rejects an empty file", () => {
    const dir = mkdtempSync(join(tmpdir(), "agg-"));
    const path = join(dir, "empty.csv");
    writeFileSync(path, "wall_time_s,frames,updates,mean_reward,std_reward,episodes\n");
    expect(() => readMetricsCSV(path)).toThrow(/no data rows/);
  });
});

describe("curveToCSV", () => {
  it("emits one row per grid point", () => {
    const curve = aggregate([rows([[0, 1], [10, 2]])], 2);
    const csv = curveToCSV(curve);
    expect(csv.split("\n")[0]).toBe("frames,mean_reward,std_reward");
    expect(csv.trim().split("\n").length).toBe(3);
  });
});
