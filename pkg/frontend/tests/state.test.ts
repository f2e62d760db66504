import { describe, expect, it } from "vitest";

import type { TelemetryFrame } from "../src/protocol";
import { canCommand, canFireEmergency, initialState, reduce } from "../src/state";

function telemetry(t: number): TelemetryFrame {
  return {
    type: "telemetry",
    t,
    position: [0, 0, 1],
    velocity: [0, 0, 0],
    guard_radius: 0.26,
    actuator_mode: "idle",
    displacement: 0,
    contacts: [],
    faults: [],
    min_obstacle_distance: null,
    min_human_distance: null,
    damaged: false,
    mission: "incomplete",
  };
}

describe("console state", () => {
  it("keeps the latest telemetry frame only", () => {
    let state = initialState();
    state = reduce(state, { kind: "frame", frame: telemetry(1) });
    state = reduce(state, { kind: "frame", frame: telemetry(2) });
    expect(state.telemetry?.t).toBe(2);
  });

  it("is reconstructed purely from telemetry after a reload", () => {
    // a fresh state plus one frame equals any older state plus the same frame
    const reloaded = reduce(
      reduce(initialState(), { kind: "socket", connection: "open" }),
      { kind: "frame", frame: telemetry(7) },
    );
    expect(reloaded.telemetry).toEqual(telemetry(7));
  });

  it("surfaces err frames as dismissable toasts", () => {
    let state = reduce(initialState(), {
      kind: "frame",
      frame: { type: "err", message: "unknown action" },
    });
    expect(state.lastError).toBe("unknown action");
    state = reduce(state, { kind: "dismiss-error" });
    expect(state.lastError).toBeNull();
  });

  it("gates the emergency button on connection and arming", () => {
    let state = initialState();
    expect(canFireEmergency(state)).toBe(false);
    state = reduce(state, { kind: "socket", connection: "open" });
    expect(canFireEmergency(state)).toBe(false); // not armed yet
    state = reduce(state, { kind: "arm", armed: true });
    expect(canFireEmergency(state)).toBe(true);
    state = reduce(state, { kind: "socket", connection: "closed" });
    expect(canFireEmergency(state)).toBe(false);
  });

  it("gates ordinary commands on connection only", () => {
    let state = reduce(initialState(), { kind: "socket", connection: "open" });
    expect(canCommand(state)).toBe(true);
    state = reduce(state, { kind: "socket", connection: "closed" });
    expect(canCommand(state)).toBe(false);
  });

  it("keeps stale telemetry for the greyed-out view while disconnected", () => {
    let state = reduce(initialState(), { kind: "frame", frame: telemetry(3) });
    state = reduce(state, { kind: "socket", connection: "closed" });
    expect(state.telemetry?.t).toBe(3);
    expect(state.connection).toBe("closed");
  });
});
