// Orthographic double-hemisphere projection of the unit sphere.
//
// The sphere is split at the plane x = 0. Points with x >= 0 land on the
// front panel, the rest on the back panel, each viewed straight down the
// x axis. Planar coordinates are (u, v) = (y, z) on the front and
// (-y, z) on the back, so the two disks read like the outside of a globe
// rotated half a turn. The equator {z = 0} is the horizontal diameter of
// both panels and great circles through +-(1,0,0) pass through the panel
// centers.

export type Vec3 = [number, number, number];

export interface PanelPoint {
  panel: 0 | 1; // 0 = front (x >= 0), 1 = back
  u: number;
  v: number;
}

export function project(p: Vec3): PanelPoint {
  const [x, y, z] = p;
  if (x >= 0) return { panel: 0, u: y, v: z };
  return { panel: 1, u: -y, v: z };
}

/** Panel assignment with a tolerance band so seam cells can sit on both sides. */
export function onPanel(p: Vec3, panel: 0 | 1, tol = 1e-12): boolean {
  return panel === 0 ? p[0] >= -tol : p[0] <= tol;
}

export function projectTo(p: Vec3, panel: 0 | 1): [number, number] {
  return panel === 0 ? [p[1], p[2]] : [-p[1], p[2]];
}
