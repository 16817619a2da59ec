// The four figure kinds. Every renderer takes parsed CSV tables produced
// by the sphereobs command line tools and returns an SVG string; nothing
// here recomputes physics, it only draws what the files contain.

import { Table, requireColumns, column } from "./csv.js";
import { Vec3, project, onPanel, projectTo } from "./project.js";
import { heatColor, CURVE_COLORS, BAND_FILLS } from "./colormap.js";
import { Svg } from "./svg.js";

export interface Cap {
  center: Vec3;
  radius: number;
}

export interface RenderOptions {
  title?: string;
  caps?: Cap[];
}

function sph(theta: number, phi: number): Vec3 {
  const st = Math.sin(theta);
  return [st * Math.cos(phi), st * Math.sin(phi), Math.cos(theta)];
}

// ---------------------------------------------------------------- panels

interface PanelLayout {
  r: number;
  cx: [number, number];
  cy: number;
}

function toScreen(lay: PanelLayout, panel: 0 | 1, u: number, v: number): [number, number] {
  return [lay.cx[panel] + u * lay.r, lay.cy - v * lay.r];
}

/**
 * Paint one lat-lon cell onto whichever panels hold all four of its
 * corners. Cells that straddle the seam at x = 0 are dropped; the grid
 * used by callers has nodes on the seam itself, so no gap opens up.
 */
function paintCell(
  svg: Svg,
  lay: PanelLayout,
  corners: Vec3[],
  fill: string,
  strokeWidth: number,
): void {
  for (const panel of [0, 1] as const) {
    if (!corners.every((c) => onPanel(c, panel, 1e-9))) continue;
    const pts = corners.map((c) => {
      const [u, v] = projectTo(c, panel);
      return toScreen(lay, panel, u, v);
    });
    svg.poly(pts, { fill, stroke: fill, "stroke-width": strokeWidth }, true);
  }
}

function panelFrames(svg: Svg, lay: PanelLayout): void {
  for (const panel of [0, 1] as const) {
    svg.circle(lay.cx[panel], lay.cy, lay.r, {
      fill: "none",
      stroke: "#333333",
      "stroke-width": 1.5,
    });
  }
  const capY = lay.cy + lay.r + 26;
  svg.text(lay.cx[0], capY, "x >= 0 hemisphere", {
    "text-anchor": "middle",
    "font-size": 13,
    fill: "#333333",
  });
  svg.text(lay.cx[1], capY, "x <= 0 hemisphere", {
    "text-anchor": "middle",
    "font-size": 13,
    fill: "#333333",
  });
}

const AXES: [string, Vec3][] = [
  ["+e1", [1, 0, 0]],
  ["-e1", [-1, 0, 0]],
  ["+e2", [0, 1, 0]],
  ["-e2", [0, -1, 0]],
  ["+e3", [0, 0, 1]],
  ["-e3", [0, 0, -1]],
];

function axisMarkers(svg: Svg, lay: PanelLayout): void {
  for (const [label, p] of AXES) {
    for (const panel of [0, 1] as const) {
      if (!onPanel(p, panel, 1e-9)) continue;
      const [u, v] = projectTo(p, panel);
      const [sx, sy] = toScreen(lay, panel, u, v);
      svg.line(sx - 4, sy, sx + 4, sy, { stroke: "#222222", "stroke-width": 1.2 });
      svg.line(sx, sy - 4, sx, sy + 4, { stroke: "#222222", "stroke-width": 1.2 });
      svg.text(sx + 7, sy - 6, label, { "font-size": 11, fill: "#222222" });
    }
  }
}

// ------------------------------------------------------------- heatmap

/** Pointwise scalar field on the sphere from a theta,phi,value grid dump. */
export function sphereHeatmap(table: Table, opts: RenderOptions = {}): string {
  requireColumns(table, ["theta", "phi", "value"], "sphere_heatmap");
  if (table.rows.length === 0) throw new Error("sphere_heatmap input has no data rows");
  const theta = column(table, "theta");
  const phi = column(table, "phi");
  const value = column(table, "value");

  const thetas = [...new Set(theta)].sort((a, b) => a - b);
  const phis = [...new Set(phi)].sort((a, b) => a - b);
  const nt = thetas.length;
  const np = phis.length;
  if (nt * np !== value.length) {
    throw new Error(`grid is ragged: ${nt} x ${np} lattice but ${value.length} rows`);
  }
  const ti = new Map(thetas.map((t, i) => [t, i]));
  const pj = new Map(phis.map((p, j) => [p, j]));
  const field: number[][] = Array.from({ length: nt }, () => new Array(np).fill(0));
  for (let r = 0; r < value.length; r++) {
    field[ti.get(theta[r])!][pj.get(phi[r])!] = value[r];
  }

  let vmin = Infinity;
  let vmax = -Infinity;
  for (const v of value) {
    if (v < vmin) vmin = v;
    if (v > vmax) vmax = v;
  }
  if (!(vmax > vmin)) vmax = vmin + 1;
  const norm = (v: number) => (v - vmin) / (vmax - vmin);

  const svg = new Svg(980, 540);
  const lay: PanelLayout = { r: 190, cx: [250, 690], cy: 280 };
  svg.text(20, 32, opts.title ?? "scalar field on the sphere", {
    "font-size": 16,
    fill: "#111111",
  });

  // phi wraps around, theta does not
  for (let i = 0; i < nt - 1; i++) {
    for (let j = 0; j < np; j++) {
      const jn = (j + 1) % np;
      const phiHi = jn === 0 ? phis[0] + 2 * Math.PI : phis[jn];
      const corners = [
        sph(thetas[i], phis[j]),
        sph(thetas[i], phiHi),
        sph(thetas[i + 1], phiHi),
        sph(thetas[i + 1], phis[j]),
      ];
      const mean =
        (field[i][j] + field[i][jn] + field[i + 1][jn] + field[i + 1][j]) / 4;
      paintCell(svg, lay, corners, heatColor(norm(mean)), 0.5);
    }
  }
  panelFrames(svg, lay);

  // colorbar
  const barX = 910;
  const barY = 90;
  const barH = 320;
  const steps = 64;
  for (let k = 0; k < steps; k++) {
    const y = barY + barH - ((k + 1) * barH) / steps;
    svg.rect(barX, y, 18, barH / steps + 0.5, {
      fill: heatColor((k + 0.5) / steps),
      stroke: "none",
    });
  }
  svg.rect(barX, barY, 18, barH, { fill: "none", stroke: "#333333", "stroke-width": 1 });
  for (let k = 0; k <= 4; k++) {
    const frac = k / 4;
    const y = barY + barH - frac * barH;
    const val = vmin + frac * (vmax - vmin);
    svg.line(barX + 18, y, barX + 22, y, { stroke: "#333333", "stroke-width": 1 });
    svg.text(barX + 25, y + 4, val.toPrecision(3), { "font-size": 10, fill: "#333333" });
  }
  return svg.toString();
}

// ------------------------------------------------------------ portrait

export interface NamedTable {
  name: string;
  table: Table;
}

/**
 * Phase portrait of geodesic-space trajectories: each input file is one
 * curve drawn over both hemisphere panels, with optional shaded bands
 * showing which directions a spherical cap region can see.
 */
export function orbitPortrait(inputs: NamedTable[], opts: RenderOptions = {}): string {
  if (inputs.length === 0) throw new Error("orbit_portrait needs at least one input");
  for (const { name, table } of inputs) {
    requireColumns(table, ["s", "n_x", "n_y", "n_z", "H"], "orbit_portrait");
    if (table.rows.length === 0) throw new Error(`${name}: no data rows`);
  }

  const svg = new Svg(980, 580);
  const lay: PanelLayout = { r: 200, cx: [250, 690], cy: 300 };
  svg.text(20, 30, opts.title ?? "orbit portrait", { "font-size": 16, fill: "#111111" });

  // region bands under everything else
  const caps = opts.caps ?? [];
  for (let ci = 0; ci < caps.length; ci++) {
    const cap = caps[ci];
    const sinR = Math.sin(cap.radius);
    const fill = BAND_FILLS[ci % BAND_FILLS.length];
    const nLat = 60;
    const nLon = 120;
    for (let i = 0; i < nLat; i++) {
      for (let j = 0; j < nLon; j++) {
        const t0 = (i * Math.PI) / nLat;
        const t1 = ((i + 1) * Math.PI) / nLat;
        const p0 = (j * 2 * Math.PI) / nLon;
        const p1 = ((j + 1) * 2 * Math.PI) / nLon;
        const mid = sph((t0 + t1) / 2, (p0 + p1) / 2);
        const dot =
          mid[0] * cap.center[0] + mid[1] * cap.center[1] + mid[2] * cap.center[2];
        if (Math.abs(dot) > sinR) continue;
        paintCell(svg, lay, [sph(t0, p0), sph(t0, p1), sph(t1, p1), sph(t1, p0)], fill, 0.4);
      }
    }
  }

  panelFrames(svg, lay);
  axisMarkers(svg, lay);

  // curves, split whenever the trajectory crosses to the other panel
  for (let idx = 0; idx < inputs.length; idx++) {
    const { table } = inputs[idx];
    const nx = column(table, "n_x");
    const ny = column(table, "n_y");
    const nz = column(table, "n_z");
    const color = CURVE_COLORS[idx % CURVE_COLORS.length];
    let run: [number, number][] = [];
    let runPanel: 0 | 1 = 0;
    const flush = () => {
      if (run.length > 1) {
        svg.poly(run, {
          fill: "none",
          stroke: color,
          "stroke-width": 1.3,
          "stroke-linejoin": "round",
        });
      }
      run = [];
    };
    for (let k = 0; k < nx.length; k++) {
      const pp = project([nx[k], ny[k], nz[k]]);
      if (run.length > 0 && pp.panel !== runPanel) flush();
      runPanel = pp.panel;
      run.push(toScreen(lay, pp.panel, pp.u, pp.v));
    }
    flush();
  }

  // legend row under the title: swatch plus file label and its energy
  let lx = 30;
  for (let idx = 0; idx < inputs.length; idx++) {
    const { name, table } = inputs[idx];
    const h0 = column(table, "H")[0];
    const color = CURVE_COLORS[idx % CURVE_COLORS.length];
    svg.line(lx, 52, lx + 18, 52, { stroke: color, "stroke-width": 2.5 });
    svg.text(lx + 23, 56, `${name} H=${h0.toFixed(3)}`, { "font-size": 11, fill: "#333333" });
    lx += 155;
  }
  return svg.toString();
}

// ---------------------------------------------------------------- scan

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

function fx(f: Frame, x: number): number {
  return f.x0 + ((x - f.xmin) / (f.xmax - f.xmin)) * f.w;
}

function fy(f: Frame, y: number): number {
  return f.y0 + f.h - ((y - f.ymin) / (f.ymax - f.ymin)) * f.h;
}

function frameBox(svg: Svg, f: Frame): void {
  svg.rect(f.x0, f.y0, f.w, f.h, { fill: "none", stroke: "#333333", "stroke-width": 1 });
}

/**
 * Region masses of an eigenfunction scan against cluster index. Masses
 * go on a log axis, floored far below anything trustworthy; untrusted
 * rows are drawn hollow, and the per-cluster minima form the profile
 * whose decay (or floor) is the point of the figure.
 */
export function obsScan(table: Table, opts: RenderOptions = {}): string {
  requireColumns(
    table,
    ["index", "lambda", "cluster_k", "mass_omega", "min_in_cluster", "trusted"],
    "obs_scan",
  );
  if (table.rows.length === 0) throw new Error("obs_scan input has no data rows");
  const k = column(table, "cluster_k");
  const mass = column(table, "mass_omega");
  const minIn = column(table, "min_in_cluster");
  const trusted = column(table, "trusted");

  const FLOOR = 1e-18;
  const ly = mass.map((m) => Math.log10(Math.max(m, FLOOR)));
  const kmax = Math.max(...k);
  const f: Frame = {
    x0: 80,
    y0: 60,
    w: 620,
    h: 360,
    xmin: -0.5,
    xmax: kmax + 0.5,
    ymin: Math.floor(Math.min(...ly)) - 0.5,
    ymax: 0.3,
  };

  const svg = new Svg(760, 500);
  svg.text(20, 30, opts.title ?? "eigenfunction mass in region", {
    "font-size": 15,
    fill: "#111111",
  });

  for (let d = Math.ceil(f.ymin); d <= 0; d++) {
    const y = fy(f, d);
    svg.line(f.x0, y, f.x0 + f.w, y, { stroke: "#dddddd", "stroke-width": 0.8 });
    svg.text(f.x0 - 8, y + 4, `1e${d}`, {
      "text-anchor": "end",
      "font-size": 10,
      fill: "#333333",
    });
  }
  const xstep = kmax > 24 ? 5 : 2;
  for (let xk = 0; xk <= kmax; xk += xstep) {
    const x = fx(f, xk);
    svg.line(x, f.y0 + f.h, x, f.y0 + f.h + 4, { stroke: "#333333", "stroke-width": 1 });
    svg.text(x, f.y0 + f.h + 18, `${xk}`, {
      "text-anchor": "middle",
      "font-size": 10,
      fill: "#333333",
    });
  }
  frameBox(svg, f);
  svg.text(f.x0 + f.w / 2, 470, "cluster index k", {
    "text-anchor": "middle",
    "font-size": 12,
    fill: "#333333",
  });

  // per-cluster minimum profile over trusted clusters only
  const prof = new Map<number, number>();
  for (let i = 0; i < k.length; i++) {
    if (trusted[i] === 1 && !prof.has(k[i])) prof.set(k[i], minIn[i]);
  }
  const ks = [...prof.keys()].sort((a, b) => a - b);
  const line: [number, number][] = ks.map((kk) => [
    fx(f, kk),
    fy(f, Math.log10(Math.max(prof.get(kk)!, FLOOR))),
  ]);
  svg.poly(line, { fill: "none", stroke: "#21618c", "stroke-width": 1.6 });
  for (const [px, py] of line) {
    svg.rect(px - 2.5, py - 2.5, 5, 5, { fill: "#21618c", stroke: "none" });
  }

  for (let i = 0; i < k.length; i++) {
    const px = fx(f, k[i]);
    const py = fy(f, ly[i]);
    if (trusted[i] === 1) {
      svg.circle(px, py, 3, { fill: "#c0392b", stroke: "none" });
    } else {
      svg.circle(px, py, 3, { fill: "white", stroke: "#888888", "stroke-width": 1 });
    }
  }

  const lgx = f.x0 + f.w - 190;
  svg.circle(lgx, 80, 3, { fill: "#c0392b", stroke: "none" });
  svg.text(lgx + 10, 84, "trusted mass", { "font-size": 11, fill: "#333333" });
  svg.circle(lgx, 98, 3, { fill: "white", stroke: "#888888", "stroke-width": 1 });
  svg.text(lgx + 10, 102, "untrusted", { "font-size": 11, fill: "#333333" });
  svg.rect(lgx - 2.5, 113.5, 5, 5, { fill: "#21618c", stroke: "none" });
  svg.text(lgx + 10, 120, "cluster minimum", { "font-size": 11, fill: "#333333" });
  return svg.toString();
}

// ----------------------------------------------------------- timeseries

/** Region mass and state norm against time from an evolution series dump. */
export function timeseries(table: Table, opts: RenderOptions = {}): string {
  requireColumns(table, ["t", "mass_omega", "norm"], "timeseries");
  if (table.rows.length === 0) throw new Error("timeseries input has no data rows");
  const t = column(table, "t");
  const mass = column(table, "mass_omega");
  const norm = column(table, "norm");

  const ymax = 1.05 * Math.max(1, Math.max(...mass), Math.max(...norm));
  const f: Frame = {
    x0: 80,
    y0: 50,
    w: 620,
    h: 290,
    xmin: t[0],
    xmax: t[t.length - 1] > t[0] ? t[t.length - 1] : t[0] + 1,
    ymin: 0,
    ymax,
  };

  const svg = new Svg(760, 420);
  svg.text(20, 28, opts.title ?? "evolution time series", { "font-size": 15, fill: "#111111" });

  for (let i = 0; i <= 5; i++) {
    const yv = (f.ymax * i) / 5;
    const y = fy(f, yv);
    svg.line(f.x0, y, f.x0 + f.w, y, { stroke: "#dddddd", "stroke-width": 0.8 });
    svg.text(f.x0 - 8, y + 4, yv.toFixed(2), {
      "text-anchor": "end",
      "font-size": 10,
      fill: "#333333",
    });
    const xv = f.xmin + ((f.xmax - f.xmin) * i) / 5;
    const x = fx(f, xv);
    svg.line(x, f.y0 + f.h, x, f.y0 + f.h + 4, { stroke: "#333333", "stroke-width": 1 });
    svg.text(x, f.y0 + f.h + 18, xv.toFixed(2), {
      "text-anchor": "middle",
      "font-size": 10,
      fill: "#333333",
    });
  }
  frameBox(svg, f);
  svg.text(f.x0 + f.w / 2, 395, "time", { "text-anchor": "middle", "font-size": 12, fill: "#333333" });

  svg.poly(
    t.map((tv, i) => [fx(f, tv), fy(f, norm[i])]),
    { fill: "none", stroke: "#5d6d7e", "stroke-width": 1.4, "stroke-dasharray": "5 3" },
  );
  svg.poly(
    t.map((tv, i) => [fx(f, tv), fy(f, mass[i])]),
    { fill: "none", stroke: "#c0392b", "stroke-width": 1.6 },
  );

  const lgx = f.x0 + f.w - 170;
  svg.line(lgx, 72, lgx + 18, 72, { stroke: "#c0392b", "stroke-width": 1.6 });
  svg.text(lgx + 23, 76, "mass in region", { "font-size": 11, fill: "#333333" });
  svg.line(lgx, 90, lgx + 18, 90, {
    stroke: "#5d6d7e",
    "stroke-width": 1.4,
    "stroke-dasharray": "5 3",
  });
  svg.text(lgx + 23, 94, "norm", { "font-size": 11, fill: "#333333" });
  return svg.toString();
}
