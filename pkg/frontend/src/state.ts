/**
 * Console state: a pure reducer over socket/UI events.
 *
 * The console is stateless with respect to simulation truth -- everything
 * shown is reconstructed from the latest telemetry frame, so a page reload
 * recovers the full view as soon as the next frame arrives.
 */
import type { ServerFrame, TelemetryFrame } from "./protocol";

export type Connection = "connecting" | "open" | "closed";

export interface ConsoleState {
  connection: Connection;
  telemetry: TelemetryFrame | null;
  armed: boolean;
  inputMode: "keyboard" | "gamepad";
  lastError: string | null;
}

export type ConsoleEvent =
  | { kind: "socket"; connection: Connection }
  | { kind: "frame"; frame: ServerFrame }
  | { kind: "arm"; armed: boolean }
  | { kind: "input-mode"; mode: "keyboard" | "gamepad" }
  | { kind: "dismiss-error" };

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    telemetry: null,
    armed: false,
    inputMode: "keyboard",
    lastError: null,
  };
}

export function reduce(state: ConsoleState, event: ConsoleEvent): ConsoleState {
  switch (event.kind) {
    case "socket":
      // telemetry is kept (greyed out) across a disconnect; the next frame
      // after reconnect replaces it wholesale
      return { ...state, connection: event.connection };
    case "frame":
      if (event.frame.type === "err") {
        return { ...state, lastError: event.frame.message };
      }
      return { ...state, telemetry: event.frame };
    case "arm":
      return { ...state, armed: event.armed };
    case "input-mode":
      return { ...state, inputMode: event.mode };
    case "dismiss-error":
      return { ...state, lastError: null };
  }
}

/** The emergency button only fires when connected and armed. */
export function canFireEmergency(state: ConsoleState): boolean {
  return state.connection === "open" && state.armed;
}

/** Velocity/guard commands need a live socket. */
export function canCommand(state: ConsoleState): boolean {
  return state.connection === "open";
}
