/**
 * Pilot input: keyboard (or gamepad) to velocity setpoints, a fixed-rate
 * sender, and an edge trigger so held keys or repeated events cannot emit
 * more than one emergency frame per press.
 */

export interface Velocity {
  vx: number;
  vy: number;
  vz: number;
}

const KEY_AXES: Record<string, Partial<Velocity>> = {
  w: { vx: 1 },
  s: { vx: -1 },
  a: { vy: 1 },
  d: { vy: -1 },
  r: { vz: 1 },
  f: { vz: -1 },
  arrowup: { vx: 1 },
  arrowdown: { vx: -1 },
  arrowleft: { vy: 1 },
  arrowright: { vy: -1 },
};

export class KeyboardVelocity {
  private held = new Set<string>();

  constructor(public speed = 0.5) {}

  keyDown(key: string): void {
    const k = key.toLowerCase();
    if (k in KEY_AXES) this.held.add(k);
  }

  keyUp(key: string): void {
    this.held.delete(key.toLowerCase());
  }

  clear(): void {
    this.held.clear();
  }

  get active(): boolean {
    return this.held.size > 0;
  }

  vector(): Velocity {
    let vx = 0;
    let vy = 0;
    let vz = 0;
    for (const key of this.held) {
      const axes = KEY_AXES[key];
      vx += axes.vx ?? 0;
      vy += axes.vy ?? 0;
      vz += axes.vz ?? 0;
    }
    const clamp = (v: number) => Math.max(-1, Math.min(1, v));
    return {
      vx: clamp(vx) * this.speed,
      vy: clamp(vy) * this.speed,
      vz: clamp(vz) * this.speed,
    };
  }
}

/**
 * Fixed-rate scheduler for velocity frames (20 Hz). After the input goes
 * idle it emits exactly one zero-velocity frame so the vehicle stops.
 */
export class VelocitySender {
  private lastSent = -Infinity;
  private wasActive = false;

  constructor(public intervalMs = 50) {}

  /** Velocity to send now, or null to stay quiet. */
  poll(nowMs: number, active: boolean, velocity: Velocity): Velocity | null {
    if (active) {
      if (nowMs - this.lastSent >= this.intervalMs) {
        this.lastSent = nowMs;
        this.wasActive = true;
        return velocity;
      }
      this.wasActive = true;
      return null;
    }
    if (this.wasActive) {
      this.wasActive = false;
      this.lastSent = nowMs;
      return { vx: 0, vy: 0, vz: 0 };
    }
    return null;
  }
}

/** Rising-edge trigger: one firing per press, rearmed only by release. */
export class EdgeTrigger {
  private down = false;

  press(): boolean {
    if (this.down) return false;
    this.down = true;
    return true;
  }

  release(): void {
    this.down = false;
  }
}

/** First connected gamepad's sticks as a velocity, if any. */
export function gamepadVelocity(
  pads: (Gamepad | null)[],
  speed = 0.5,
  deadzone = 0.15,
): Velocity | null {
  const pad = pads.find((p) => p !== null && p.connected);
  if (!pad) return null;
  const shape = (v: number) => (Math.abs(v) < deadzone ? 0 : v);
  // left stick: forward/strafe; right stick vertical: climb
  return {
    vx: -shape(pad.axes[1] ?? 0) * speed,
    vy: -shape(pad.axes[0] ?? 0) * speed,
    vz: -shape(pad.axes[3] ?? 0) * speed,
  };
}
