// Sequential colormap for scalar fields plus a categorical palette for
// curves. The sequential one is a piecewise-linear walk through anchor
// colors of the familiar dark-violet-to-yellow ramp.

const ANCHORS: [number, number, number][] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

function hex2(n: number): string {
  return n.toString(16).padStart(2, "0");
}

export function heatColor(t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(x));
  const f = x - i;
  const a = ANCHORS[i];
  const b = ANCHORS[i + 1];
  const r = Math.round(a[0] + f * (b[0] - a[0]));
  const g = Math.round(a[1] + f * (b[1] - a[1]));
  const bl = Math.round(a[2] + f * (b[2] - a[2]));
  return `#${hex2(r)}${hex2(g)}${hex2(bl)}`;
}

export const HEAT_TOP = heatColor(1);

export const CURVE_COLORS = [
  "#c0392b",
  "#2471a3",
  "#1e8449",
  "#b7950b",
  "#7d3c98",
  "#d35400",
  "#117a65",
  "#5d6d7e",
];

export const BAND_FILLS = ["#d6e4f0", "#e8d9f0", "#d9f0dc", "#f0e8d0"];
