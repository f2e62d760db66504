/**
 * Pure view geometry: world coordinates (meters) to canvas pixels.
 *
 * Top view looks down the world z-axis (+x right, +y up on screen); side view
 * looks along -y (+x right, +z up). Both share one pixels-per-meter scale so
 * the guard circle is always drawn to scale, and both track the drone so it
 * stays centered.
 */

export interface Camera {
  centerX: number; // world coordinate at the canvas center (x)
  centerYorZ: number; // world y (top view) or z (side view) at the center
  pxPerMeter: number;
  width: number;
  height: number;
}

export interface Px {
  x: number;
  y: number;
}

export function makeCamera(
  width: number,
  height: number,
  centerX: number,
  centerYorZ: number,
  pxPerMeter = 120,
): Camera {
  return { centerX, centerYorZ, pxPerMeter, width, height };
}

/** World (a, b) -> pixels, with the world b-axis pointing up on screen. */
export function toPx(cam: Camera, a: number, b: number): Px {
  return {
    x: cam.width / 2 + (a - cam.centerX) * cam.pxPerMeter,
    y: cam.height / 2 - (b - cam.centerYorZ) * cam.pxPerMeter,
  };
}

/** Lengths scale linearly: a guard of radius r meters is r * pxPerMeter pixels. */
export function lengthPx(cam: Camera, meters: number): number {
  return meters * cam.pxPerMeter;
}

export interface ArrowPx {
  from: Px;
  to: Px;
}

/**
 * Contact hint arrow in the top view: from the drone icon outward along the
 * contact bearing (azimuth 0 points along world +x).
 */
export function hintArrowTop(
  cam: Camera,
  droneX: number,
  droneY: number,
  azimuthRad: number,
  startMeters: number,
  lengthMeters: number,
): ArrowPx {
  const fx = droneX + startMeters * Math.cos(azimuthRad);
  const fy = droneY + startMeters * Math.sin(azimuthRad);
  const tx = droneX + (startMeters + lengthMeters) * Math.cos(azimuthRad);
  const ty = droneY + (startMeters + lengthMeters) * Math.sin(azimuthRad);
  return { from: toPx(cam, fx, fy), to: toPx(cam, tx, ty) };
}

// -- obstacle footprints from the served scenario document -------------------

export interface PlaneDoc {
  shape: "plane";
  point: number[];
  normal: number[];
  tag: string;
}
export interface SphereDoc {
  shape: "sphere";
  center: number[];
  radius: number;
  tag: string;
}
export interface BoxDoc {
  shape: "box";
  center: number[];
  half_extents: number[];
  tag: string;
}
export type ObstacleDoc = PlaneDoc | SphereDoc | BoxDoc;

export interface SegmentPx {
  from: Px;
  to: Px;
}

/**
 * A wall's trace in the top view: the line through its anchor point,
 * perpendicular to its (in-plane) normal, clipped to a fixed half-extent.
 */
export function planeTraceTop(
  cam: Camera,
  plane: PlaneDoc,
  halfExtentMeters = 10,
): SegmentPx | null {
  const [nx, ny] = plane.normal;
  const planar = Math.hypot(nx, ny);
  if (planar < 1e-9) return null; // floor/ceiling: invisible from above
  const tx = -ny / planar;
  const ty = nx / planar;
  const [px, py] = plane.point;
  return {
    from: toPx(cam, px - tx * halfExtentMeters, py - ty * halfExtentMeters),
    to: toPx(cam, px + tx * halfExtentMeters, py + ty * halfExtentMeters),
  };
}

/** A wall's trace in the side (x-z) view; null for walls parallel to it. */
export function planeTraceSide(
  cam: Camera,
  plane: PlaneDoc,
  halfExtentMeters = 10,
): SegmentPx | null {
  const [nx, , nz] = [plane.normal[0], plane.normal[1], plane.normal[2]];
  const planar = Math.hypot(nx, nz);
  if (planar < 1e-9) return null;
  const tx = -nz / planar;
  const tz = nx / planar;
  const [px, , pz] = [plane.point[0], plane.point[1], plane.point[2]];
  return {
    from: toPx(cam, px - tx * halfExtentMeters, pz - tz * halfExtentMeters),
    to: toPx(cam, px + tx * halfExtentMeters, pz + tz * halfExtentMeters),
  };
}
