#!/usr/bin/env node
// Command line entry point.
//
//   sphereobs-plots <kind> --input file.csv[,file2.csv...] --output fig.svg
//                   [--region "cx,cy,cz,r;..."] [--title "..."]
//
// Kinds: sphere_heatmap, orbit_portrait, obs_scan, timeseries. Inputs are
// the CSV files written by the sphereobs CLI; orbit_portrait accepts many
// trajectory files at once, the other kinds exactly one file.

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname, basename } from "node:path";
import { parseCsv, Table } from "./csv.js";
import {
  sphereHeatmap,
  orbitPortrait,
  obsScan,
  timeseries,
  Cap,
  RenderOptions,
  NamedTable,
} from "./render.js";
import { Vec3 } from "./project.js";

const KINDS = ["sphere_heatmap", "orbit_portrait", "obs_scan", "timeseries"];

const USAGE =
  "usage: sphereobs-plots <kind> --input a.csv[,b.csv...] --output out.svg " +
  "[--region caps] [--title text]\n" +
  `kinds: ${KINDS.join(", ")}`;

function parseRegion(spec: string): Cap[] {
  const caps: Cap[] = [];
  for (const part of spec.split(";")) {
    const nums = part.split(",").map(Number);
    if (nums.length !== 4 || nums.some(Number.isNaN)) {
      throw new Error(`bad region '${part}': expected cx,cy,cz,radius`);
    }
    const n = Math.hypot(nums[0], nums[1], nums[2]);
    if (!(n > 0)) throw new Error(`bad region '${part}': zero center`);
    const center: Vec3 = [nums[0] / n, nums[1] / n, nums[2] / n];
    caps.push({ center, radius: nums[3] });
  }
  return caps;
}

export function runCli(argv: string[]): number {
  try {
    if (argv.length === 0 || argv[0] === "--help" || argv[0] === "-h") {
      console.log(USAGE);
      return argv.length === 0 ? 2 : 0;
    }
    const kind = argv[0];
    if (!KINDS.includes(kind)) {
      throw new Error(`unknown kind '${kind}'; expected one of ${KINDS.join(", ")}`);
    }

    let inputSpec = "";
    let output = "";
    let regionSpec = "";
    let title: string | undefined;
    for (let i = 1; i < argv.length; i += 2) {
      const flag = argv[i];
      const val = argv[i + 1];
      if (val === undefined) throw new Error(`flag ${flag} needs a value`);
      if (flag === "--input") inputSpec = val;
      else if (flag === "--output") output = val;
      else if (flag === "--region") regionSpec = val;
      else if (flag === "--title") title = val;
      else throw new Error(`unknown flag ${flag}`);
    }
    if (!inputSpec) throw new Error("missing --input");
    if (!output) throw new Error("missing --output");

    const paths = inputSpec.split(",").filter((p) => p.length > 0);
    const named: NamedTable[] = paths.map((p) => {
      let text: string;
      try {
        text = readFileSync(p, "utf8");
      } catch {
        throw new Error(`cannot read input file '${p}'`);
      }
      let table: Table;
      try {
        table = parseCsv(text);
      } catch (e) {
        throw new Error(`${p}: ${(e as Error).message}`);
      }
      return { name: basename(p).replace(/\.csv$/, ""), table };
    });

    const opts: RenderOptions = { title };
    if (regionSpec) opts.caps = parseRegion(regionSpec);

    let out: string;
    if (kind === "orbit_portrait") {
      out = orbitPortrait(named, opts);
    } else {
      if (named.length !== 1) {
        throw new Error(`${kind} takes exactly one input file, got ${named.length}`);
      }
      if (kind === "sphere_heatmap") out = sphereHeatmap(named[0].table, opts);
      else if (kind === "obs_scan") out = obsScan(named[0].table, opts);
      else out = timeseries(named[0].table, opts);
    }

    const dir = dirname(output);
    if (dir && dir !== ".") mkdirSync(dir, { recursive: true });
    writeFileSync(output, out);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("sphereobs-plots")) {
  process.exit(runCli(process.argv.slice(2)));
}
