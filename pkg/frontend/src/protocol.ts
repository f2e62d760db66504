/**
 * Wire protocol spoken with the simulator service: JSON text frames over a
 * WebSocket. Telemetry flows in at 20 Hz; commands flow out and take effect
 * at the next simulation tick.
 */

export interface ContactHint {
  azimuth_rad: number;
  elevation_rad: number;
  force_n: number;
}

export interface TelemetryFrame {
  type: "telemetry";
  t: number;
  position: [number, number, number];
  velocity: [number, number, number];
  guard_radius: number;
  actuator_mode: "idle" | "expanding" | "collapsing" | "seek";
  displacement: number;
  contacts: ContactHint[];
  faults: string[];
  min_obstacle_distance: number | null;
  min_human_distance: number | null;
  damaged: boolean;
  mission: string;
}

export interface ErrFrame {
  type: "err";
  message: string;
}

export type ServerFrame = TelemetryFrame | ErrFrame;

export type GuardAction = "expand" | "collapse" | "stop" | "seek" | "emergency";

export type ClientFrame =
  | { type: "cmd.velocity"; vx: number; vy: number; vz: number }
  | { type: "cmd.waypoint"; position: [number, number, number]; hold_time_s: number }
  | { type: "cmd.guard"; action: GuardAction; radius_m?: number };

/** Parse a server frame; returns null for anything malformed. */
export function parseServerFrame(text: string): ServerFrame | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null || !("type" in doc)) return null;
  const frame = doc as Record<string, unknown>;
  if (frame.type === "err" && typeof frame.message === "string") {
    return frame as unknown as ErrFrame;
  }
  if (
    frame.type === "telemetry" &&
    Array.isArray(frame.position) &&
    frame.position.length === 3 &&
    typeof frame.guard_radius === "number" &&
    typeof frame.actuator_mode === "string"
  ) {
    return frame as unknown as TelemetryFrame;
  }
  return null;
}

export function velocityFrame(vx: number, vy: number, vz: number): ClientFrame {
  return { type: "cmd.velocity", vx, vy, vz };
}

export function guardFrame(action: GuardAction, radiusM?: number): ClientFrame {
  if (action === "seek") {
    if (radiusM === undefined) throw new Error("seek needs a radius");
    return { type: "cmd.guard", action, radius_m: radiusM };
  }
  return { type: "cmd.guard", action };
}

export function emergencyFrame(): ClientFrame {
  return { type: "cmd.guard", action: "emergency" };
}

export function encodeFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}
