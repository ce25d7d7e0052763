#!/usr/bin/env node
import { writeFileSync } from "fs";
import yargs from "yargs";
import { aggregate, curveToCSV, readMetricsCSV } from "./aggregate";
import { PALETTE, renderChart, Series } from "./chart";
import { encodePNG } from "./png";

interface Args {
  series: string[];
  out: string;
  csv?: string;
  points: number;
  window: number;
  width: number;
  height: number;
  title: string;
}

export function parseSeriesSpec(spec: string): { label: string; paths: string[] } {
  // "label=seed0.csv,seed1.csv,seed2.csv"
  const eq = spec.indexOf("=");
  if (eq < 1) throw new Error(`series spec needs 'label=file,...': ${spec}`);
  const label = spec.slice(0, eq).trim();
  const paths = spec.slice(eq + 1).split(",").map((p) => p.trim()).filter(Boolean);
  if (paths.length === 0) throw new Error(`series '${label}' lists no files`);
  return { label, paths };
}

export function buildSeries(specs: string[], points: number, window: number): Series[] {
  return specs.map((spec, i) => {
    const { label, paths } = parseSeriesSpec(spec);
    const runs = paths.map(readMetricsCSV);
    return {
      label,
      curve: aggregate(runs, points, window),
      color: PALETTE[i % PALETTE.length],
    };
  });
}

function main(): number {
  const args = yargs(process.argv.slice(2))
    .usage("Aggregate metrics CSVs across seeds and render a learning-curve figure")
    .option("series", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "repeatable 'label=seed0.csv,seed1.csv,...'",
    })
    .option("out", { type: "string", demandOption: true, describe: "PNG file to write" })
    .option("csv", { type: "string", describe: "also write the first series' aggregated curve as CSV" })
    .option("points", { type: "number", default: 100, describe: "grid points on the shared frame axis" })
    .option("window", { type: "number", default: 1, describe: "odd moving-average window" })
    .option("width", { type: "number", default: 640 })
    .option("height", { type: "number", default: 400 })
    .option("title", { type: "string", default: "" })
    .strict()
    .parseSync() as unknown as Args;

  try {
    const series = buildSeries(args.series, args.points, args.window);
    writeFileSync(args.out, encodePNG(renderChart(series, args.width, args.height, args.title)));
    if (args.csv) {
      writeFileSync(args.csv, curveToCSV(series[0].curve));
    }
    console.log(`wrote ${args.out} (${series.length} series)`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main());
}
