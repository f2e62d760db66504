/**
 * Console wiring: socket, input loops, DOM controls, render loop.
 *
 * The client never predicts physics; it renders the latest telemetry frame
 * only, so the server's deterministic log stays the single ground truth.
 */
import { EdgeTrigger, KeyboardVelocity, VelocitySender, gamepadVelocity } from "./input";
import { emergencyFrame, guardFrame, velocityFrame } from "./protocol";
import { renderSideView, renderTopView, type SceneConfig } from "./render";
import { TeleopSocket } from "./socket";
import { canCommand, canFireEmergency, initialState, reduce, type ConsoleState } from "./state";
import type { ObstacleDoc } from "./view";

const params = new URLSearchParams(location.search);
const host = params.get("host") ?? location.hostname ?? "127.0.0.1";
const port = params.get("port") ?? "8700";
const baseHttp = `http://${host}:${port}`;

let state: ConsoleState = initialState();
const scene: SceneConfig = { obstacles: [], humanBufferM: 0.5, pxPerMeter: 120 };
let sliderBounds = { min: 0.26, max: 0.425 };

function dispatch(event: Parameters<typeof reduce>[1]): void {
  state = reduce(state, event);
  syncControls();
}

const socket = new TeleopSocket(`ws://${host}:${port}/ws`, {
  onFrame: (frame) => dispatch({ kind: "frame", frame }),
  onConnection: (connection) => dispatch({ kind: "socket", connection }),
});

async function fetchScenario(): Promise<void> {
  try {
    const doc = await (await fetch(`${baseHttp}/api/scenario`)).json();
    scene.obstacles = (doc.obstacles ?? []) as ObstacleDoc[];
    scene.humanBufferM = doc.policy?.human_buffer_m ?? 0.5;
    const guard = doc.guard ?? {};
    sliderBounds = {
      min: (guard.collapsed_diameter_m ?? 0.52) / 2,
      max: (guard.expanded_diameter_m ?? 0.85) / 2,
    };
    const slider = document.getElementById("guard-slider") as HTMLInputElement;
    slider.min = sliderBounds.min.toFixed(3);
    slider.max = sliderBounds.max.toFixed(3);
    slider.value = slider.min;
  } catch {
    // server not up yet; the socket reconnect loop will retry and the
    // scenario fetch is retried on the next successful connect
  }
}

// -- DOM ----------------------------------------------------------------------

const topCanvas = document.getElementById("top-view") as HTMLCanvasElement;
const sideCanvas = document.getElementById("side-view") as HTMLCanvasElement;
const statusBadge = document.getElementById("status") as HTMLSpanElement;
const readouts = document.getElementById("readouts") as HTMLDivElement;
const toast = document.getElementById("toast") as HTMLDivElement;
const armSwitch = document.getElementById("arm") as HTMLInputElement;
const emergencyButton = document.getElementById("emergency") as HTMLButtonElement;
const slider = document.getElementById("guard-slider") as HTMLInputElement;
const expandButton = document.getElementById("expand") as HTMLButtonElement;
const collapseButton = document.getElementById("collapse") as HTMLButtonElement;

function syncControls(): void {
  emergencyButton.disabled = !canFireEmergency(state);
  expandButton.disabled = !canCommand(state);
  collapseButton.disabled = !canCommand(state);
  slider.disabled = !canCommand(state);
  statusBadge.textContent = state.connection;
  statusBadge.className = `badge ${state.connection}`;
  if (state.lastError) {
    toast.textContent = state.lastError;
    toast.classList.add("visible");
    setTimeout(() => {
      toast.classList.remove("visible");
      dispatch({ kind: "dismiss-error" });
    }, 4000);
  }
}

armSwitch.addEventListener("change", () => dispatch({ kind: "arm", armed: armSwitch.checked }));

const emergencyTrigger = new EdgeTrigger();
emergencyButton.addEventListener("mousedown", () => {
  // exactly one frame per press; the server side is idempotent anyway
  if (emergencyTrigger.press() && canFireEmergency(state)) {
    socket.send(emergencyFrame());
  }
});
emergencyButton.addEventListener("mouseup", () => emergencyTrigger.release());
emergencyButton.addEventListener("mouseleave", () => emergencyTrigger.release());

expandButton.addEventListener("click", () => socket.send(guardFrame("expand")));
collapseButton.addEventListener("click", () => socket.send(guardFrame("collapse")));
slider.addEventListener("change", () => {
  socket.send(guardFrame("seek", Number(slider.value)));
});

// -- velocity input -------------------------------------------------------------

const keyboard = new KeyboardVelocity(0.5);
const sender = new VelocitySender(50); // 20 Hz

window.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  keyboard.keyDown(event.key);
});
window.addEventListener("keyup", (event) => keyboard.keyUp(event.key));
window.addEventListener("blur", () => keyboard.clear());

setInterval(() => {
  if (!canCommand(state)) return;
  let velocity = keyboard.vector();
  let active = keyboard.active;
  if (state.inputMode === "gamepad" || !active) {
    const padVelocity = gamepadVelocity([...navigator.getGamepads()]);
    if (padVelocity && (padVelocity.vx || padVelocity.vy || padVelocity.vz)) {
      velocity = padVelocity;
      active = true;
      if (state.inputMode !== "gamepad") dispatch({ kind: "input-mode", mode: "gamepad" });
    }
  }
  const out = sender.poll(performance.now(), active, velocity);
  if (out) socket.send(velocityFrame(out.vx, out.vy, out.vz));
}, 25);

// -- render loop ----------------------------------------------------------------

function describe(frame: ConsoleState["telemetry"]): string {
  if (!frame) return "waiting for telemetry";
  const [x, y, z] = frame.position;
  const lines = [
    `t         ${frame.t.toFixed(2)} s`,
    `position  ${x.toFixed(2)}, ${y.toFixed(2)}, ${z.toFixed(2)} m`,
    `guard     ${(2 * frame.guard_radius * 100).toFixed(1)} cm ${frame.actuator_mode}`,
    `contacts  ${frame.contacts.length}`,
    `nearest   ${frame.min_obstacle_distance?.toFixed(2) ?? "-"} m`,
    `faults    ${frame.faults.join(", ") || "none"}`,
    `mission   ${frame.mission}${frame.damaged ? " (structure damaged)" : ""}`,
  ];
  return lines.join("\n");
}

function frameLoop(): void {
  const connected = state.connection === "open";
  renderTopView(
    topCanvas.getContext("2d")!,
    state.telemetry, scene, topCanvas.width, topCanvas.height, connected,
  );
  renderSideView(
    sideCanvas.getContext("2d")!,
    state.telemetry, scene, sideCanvas.width, sideCanvas.height, connected,
  );
  readouts.textContent = describe(state.telemetry);
  requestAnimationFrame(frameLoop);
}

fetchScenario();
socket.connect();
syncControls();
requestAnimationFrame(frameLoop);
