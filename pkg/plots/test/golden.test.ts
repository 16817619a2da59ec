// Byte-level regression tests: rendering the committed fixture data must
// reproduce the committed SVG files exactly, twice in a row.

import { describe, it, expect } from "vitest";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { runCli } from "../dist/cli.js";

const ROOT = fileURLToPath(new URL("..", import.meta.url));
const FIX = join(ROOT, "fixtures");
const GOLD = join(FIX, "golden");

const ORBIT_INPUTS = ["orbit_lowp", "orbit_lown", "orbit_highp", "orbit_highn", "orbit_sep1", "orbit_sep2"]
  .map((n) => join(FIX, n + ".csv"))
  .join(",");

const JOBS: { golden: string; argv: string[] }[] = [
  {
    golden: "phi20_heatmap.svg",
    argv: [
      "sphere_heatmap",
      "--input",
      join(FIX, "phi20_density.csv"),
      "--title",
      "highest weight state, k = 20",
    ],
  },
  {
    golden: "orbit_portrait.svg",
    argv: [
      "orbit_portrait",
      "--input",
      ORBIT_INPUTS,
      "--region",
      "0,0,1,0.15;0,1,0,0.15",
      "--title",
      "geodesic flow for q = diag(1,2,3)",
    ],
  },
  {
    golden: "obs_scan.svg",
    argv: [
      "obs_scan",
      "--input",
      join(FIX, "scan.csv"),
      "--title",
      "eigenfunction mass, two-cap region",
    ],
  },
];

describe("golden renders", () => {
  for (const job of JOBS) {
    it(`reproduces ${job.golden} byte for byte`, () => {
      const d = mkdtempSync(join(tmpdir(), "golden-"));
      const out1 = join(d, "a.svg");
      const out2 = join(d, "b.svg");
      expect(runCli([...job.argv, "--output", out1])).toBe(0);
      expect(runCli([...job.argv, "--output", out2])).toBe(0);
      const a = readFileSync(out1);
      const b = readFileSync(out2);
      expect(a.equals(b)).toBe(true);
      const gold = readFileSync(join(GOLD, job.golden));
      expect(a.equals(gold)).toBe(true);
    });
  }
});
