"""Deterministic scenario runner: the tick loop, event log, and metrics.

One physics tick runs physics -> control -> policy -> actuator -> contacts ->
log. Control, policy and telemetry fire on their own divisors of the physics
rate, so control decisions only change on control boundaries and so on. All
randomness (mocap noise, stroke jitter) flows from the scenario seed through
a single generator, which makes (scenario, seed) -> event log a pure function;
the JSONL serialization is canonical so logs can be compared byte for byte.

The event log is the source of truth: metrics are a pure fold over it and can
be recomputed from the serialized form.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .actuation import (
    ActuatorMode,
    ActuatorState,
    CommandQueue,
    GuardCommand,
    displacement_to_theta,
    emergency_expand,
    rack_spec_for_guard,
    step as actuator_step,
)
from .assembly import assemble, coverage_volume
from .errors import ScenarioValidationError
from .flight import (
    SENSOR_LOSS,
    THRUST_LOSS,
    DroneState,
    MotionCaptureSim,
    PositionController,
    TrajectoryFollower,
    step_dynamics,
)
from .policy import (
    ObstacleTag,
    PolicyAction,
    bump_hints,
    freefall_detect,
    prop_discs_touched,
    proximity_policy,
    resolve_contacts,
)
from .scenario import Scenario
from .scissor import calibrate_ring


class FrameError(ValueError):
    """A malformed wire frame; the simulation is unaffected."""


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Fraction):
        return float(value)
    return value


@dataclass(frozen=True)
class LogRecord:
    t: float
    kind: str
    data: dict

    def as_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, "data": _jsonable(self.data)}


class EventLog:
    """Append-only, monotonically timestamped record list."""

    def __init__(self):
        self.records: list[LogRecord] = []

    def append(self, t: float, kind: str, data: dict) -> None:
        if self.records and t < self.records[-1].t - 1e-12:
            raise ValueError("log timestamps must be monotone")
        self.records.append(LogRecord(t=float(t), kind=kind, data=_jsonable(data)))

    def by_kind(self, kind: str) -> list[LogRecord]:
        return [r for r in self.records if r.kind == kind]

    def to_jsonl(self) -> bytes:
        lines = [
            json.dumps(r.as_dict(), sort_keys=True, separators=(",", ":"))
            for r in self.records
        ]
        return ("\n".join(lines) + "\n").encode()

    @classmethod
    def from_jsonl(cls, payload: bytes) -> "EventLog":
        log = cls()
        for line in payload.decode().splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            log.append(doc["t"], doc["kind"], doc["data"])
        return log

    def telemetry_csv(self) -> str:
        """Flat CSV of the telemetry records for plotting."""
        header = [
            "t", "x", "y", "z", "vx", "vy", "vz", "guard_radius",
            "actuator_mode", "displacement", "min_obstacle_distance",
            "min_human_distance", "contact_count", "damaged",
        ]
        rows = [",".join(header)]
        for rec in self.by_kind("telemetry"):
            d = rec.data
            rows.append(
                ",".join(
                    [
                        repr(rec.t),
                        *[repr(v) for v in d["position"]],
                        *[repr(v) for v in d["velocity"]],
                        repr(d["guard_radius"]),
                        d["actuator_mode"],
                        repr(d["displacement"]),
                        repr(d["min_obstacle_distance"]),
                        repr(d["min_human_distance"]),
                        str(len(d["contacts"])),
                        str(int(d["damaged"])),
                    ]
                )
            )
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class Metrics:
    mission_outcome: str = "incomplete"  # complete | incomplete | failure
    peak_contact_force_n: float = 0.0
    contact_count: int = 0
    min_human_separation_m: float | None = None
    min_obstacle_distance_m: float | None = None
    expansion_latency_s: float | None = None
    structure_damaged: bool = False
    flight_time_s: float = 0.0

    def as_dict(self) -> dict:
        return {
            "mission_outcome": self.mission_outcome,
            "peak_contact_force_n": self.peak_contact_force_n,
            "contact_count": self.contact_count,
            "min_human_separation_m": self.min_human_separation_m,
            "min_obstacle_distance_m": self.min_obstacle_distance_m,
            "expansion_latency_s": self.expansion_latency_s,
            "structure_damaged": self.structure_damaged,
            "flight_time_s": self.flight_time_s,
        }


def metrics_summary(log: EventLog) -> Metrics:
    """Pure fold over an event log; stable across re-reads of the same log."""
    peak = 0.0
    contacts = 0
    min_human = None
    min_obstacle = None
    damaged = False
    outcome = "incomplete"
    flight_time = 0.0
    expand_started = None
    latency = None
    for rec in log.records:
        flight_time = max(flight_time, rec.t)
        if rec.kind == "contact":
            contacts += 1
            peak = max(peak, rec.data["applied_force"])
        elif rec.kind == "breakage":
            damaged = True
        elif rec.kind == "telemetry":
            d = rec.data
            if d["min_human_distance"] is not None:
                min_human = (
                    d["min_human_distance"]
                    if min_human is None
                    else min(min_human, d["min_human_distance"])
                )
            if d["min_obstacle_distance"] is not None:
                min_obstacle = (
                    d["min_obstacle_distance"]
                    if min_obstacle is None
                    else min(min_obstacle, d["min_obstacle_distance"])
                )
        elif rec.kind == "actuator":
            if rec.data.get("event") == "mode_change":
                if rec.data.get("mode") == ActuatorMode.EXPANDING.value:
                    if expand_started is None:
                        expand_started = rec.t
            elif rec.data.get("event") == "stroke_complete":
                if expand_started is not None and latency is None:
                    latency = rec.t - expand_started
        elif rec.kind == "mission":
            outcome = rec.data["outcome"]
    return Metrics(
        mission_outcome=outcome,
        peak_contact_force_n=peak,
        contact_count=contacts,
        min_human_separation_m=min_human,
        min_obstacle_distance_m=min_obstacle,
        expansion_latency_s=latency,
        structure_damaged=damaged,
        flight_time_s=flight_time,
    )


def parse_frame(frame: dict) -> dict:
    """Validate a wire frame; returns it back normalized. Raises FrameError."""
    if not isinstance(frame, dict) or "type" not in frame:
        raise FrameError("frame must be an object with a 'type'")
    ftype = frame["type"]
    if ftype == "cmd.velocity":
        try:
            return {
                "type": ftype,
                "vx": float(frame.get("vx", 0.0)),
                "vy": float(frame.get("vy", 0.0)),
                "vz": float(frame.get("vz", 0.0)),
            }
        except (TypeError, ValueError) as exc:
            raise FrameError(f"cmd.velocity: {exc}") from exc
    if ftype == "cmd.waypoint":
        pos = frame.get("position")
        if not isinstance(pos, (list, tuple)) or len(pos) != 3:
            raise FrameError("cmd.waypoint: position must be [x, y, z]")
        return {
            "type": ftype,
            "position": [float(v) for v in pos],
            "hold_time_s": float(frame.get("hold_time_s", 0.0)),
        }
    if ftype == "cmd.guard":
        action = frame.get("action")
        if action not in ("expand", "collapse", "stop", "seek", "emergency"):
            raise FrameError(f"cmd.guard: unknown action {action!r}")
        radius = frame.get("radius_m")
        if action == "seek":
            try:
                radius = float(radius)
            except (TypeError, ValueError) as exc:
                raise FrameError("cmd.guard: seek needs a numeric radius_m") from exc
        return {"type": ftype, "action": action, "radius_m": radius}
    raise FrameError(f"unknown frame type {ftype!r}")


class Simulation:
    """Single-writer world advanced one physics tick at a time.

    Inbound wire frames cross ``submit_frame`` into a queue drained at tick
    boundaries; telemetry leaves as snapshot dicts appended to the log. No
    world state is shared mutably across threads.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.rng = np.random.default_rng(scenario.seed)
        self.log = EventLog()

        rates = scenario.rates
        self.dt = 1.0 / rates.physics_hz
        self._control_div = rates.physics_hz // rates.control_hz
        self._policy_div = rates.physics_hz // rates.policy_hz
        self._telemetry_div = rates.physics_hz // rates.telemetry_hz

        g = scenario.guard
        ring_spec, deployment = calibrate_ring(
            g.unit_count, g.collapsed_diameter_m / 2.0, g.expanded_diameter_m / 2.0
        )
        self.guard = assemble(
            g.kind,
            ring_spec,
            deployment,
            ring_mass=g.ring_mass_kg,
            actuator_mass=g.actuator_mass_kg,
            tube_radius=g.tube_radius_m,
            hub_offset=g.hub_offset_m,
            ring_separation=g.ring_separation_m,
        )
        self.rack = rack_spec_for_guard(
            self.guard,
            full_stroke_time=scenario.actuator.full_stroke_time_s,
            attachment=scenario.actuator.attachment,
            command_latency=scenario.actuator.command_latency_s,
            jitter_sigma=scenario.actuator.jitter_sigma,
        )
        rate_scale = 1.0
        if scenario.actuator.jitter_sigma > 0:
            rate_scale = max(0.1, 1.0 + scenario.actuator.jitter_sigma * self.rng.standard_normal())
        self.actuator = ActuatorState(rate_scale=rate_scale)
        self.commands = CommandQueue()

        self.total_mass = scenario.drone.base_mass + self.guard.total_mass
        self.drone = DroneState(position=np.asarray(scenario.initial_position_m, float))
        self.controller = PositionController(scenario.gains, scenario.drone)
        self.mocap = MotionCaptureSim(
            rate_hz=scenario.mocap.rate_hz,
            noise_sigma=scenario.mocap.noise_sigma_m,
            dropout=scenario.mocap.dropout,
            rng=self.rng,
        )
        self.follower = (
            TrajectoryFollower(scenario.trajectory, self.drone.position)
            if scenario.trajectory is not None
            else None
        )
        self._hold_target = self.drone.position.copy()
        self._velocity_target: np.ndarray | None = None

        window_samples = max(
            2, math.ceil(scenario.policy.freefall_accel_window * rates.policy_hz) + 1
        )
        self._accel_history: deque = deque(maxlen=window_samples)
        self._last_policy_velocity = self.drone.velocity.copy()

        self.tick_index = 0
        self.damaged = False
        self.mission_failed = False
        self._contact_force = np.zeros(3)
        self._last_contacts: tuple = ()
        self._faults_fired: set[str] = set()
        self._scripted_faults = list(scenario.fault_events)
        self._scripted_frames = list(scenario.command_script)
        self._inbound: deque = deque()
        # the guard starts collapsed, so a startup "collapse" would be a no-op
        # and would needlessly countermand any scripted manual command
        self._last_policy_action: PolicyAction | None = PolicyAction.COLLAPSE
        self._freefall_latched = False
        self._actuator_mode_logged = self.actuator.mode
        self._stroke_complete_logged = False
        self._collapse_complete_logged = True  # starts collapsed
        self._grounded = False
        self._finished_logged = False
        self._last_telemetry: dict | None = None
        self._theta_cache: tuple[Fraction, float] | None = None
        self._coverage_cache: tuple[float, object] | None = None

        self.log.append(0.0, "scenario", {"name": scenario.name, "seed": scenario.seed})

    # -- wire interface ----------------------------------------------------

    def submit_frame(self, frame: dict) -> None:
        """Queue a validated wire frame for the next tick boundary."""
        self._inbound.append(parse_frame(frame))

    @property
    def time(self) -> float:
        return self.tick_index * self.dt

    # -- internals ----------------------------------------------------------

    def _theta(self) -> float:
        disp = self.actuator.displacement
        if self._theta_cache is not None and self._theta_cache[0] == disp:
            return self._theta_cache[1]
        theta = displacement_to_theta(
            self.rack, self.guard.ring_spec, self.guard.deployment, float(disp)
        )
        self._theta_cache = (disp, theta)
        return theta

    def _coverage(self, theta: float):
        if self._coverage_cache is not None and self._coverage_cache[0] == theta:
            return self._coverage_cache[1]
        cov = coverage_volume(self.guard, theta)
        self._coverage_cache = (theta, cov)
        return cov

    def _apply_frame(self, frame: dict, t: float) -> None:
        ftype = frame["type"]
        self.log.append(t, "command", frame)
        if ftype == "cmd.velocity":
            self._velocity_target = np.array([frame["vx"], frame["vy"], frame["vz"]])
        elif ftype == "cmd.waypoint":
            from .flight import Trajectory  # local to avoid cycle at import time

            self._velocity_target = None
            self.follower = TrajectoryFollower(
                Trajectory(
                    waypoints=((np.asarray(frame["position"], float), frame["hold_time_s"]),)
                ),
                self.drone.position,
            )
        elif ftype == "cmd.guard":
            cmd = GuardCommand(action=frame["action"], radius_m=frame.get("radius_m"))
            self.commands.push(cmd, now=t, latency=self.rack.command_latency)

    def _fire_fault(self, kind: str, t: float) -> None:
        if kind == "thrust_cut":
            self.drone = self.drone.with_fault(THRUST_LOSS)
        elif kind == "sensor_loss":
            self.mocap.dropout = 1.0
        if kind not in self._faults_fired:
            self._faults_fired.add(kind)
            self.log.append(t, "fault", {"fault": kind})

    def _log_actuator_transitions(self, before: ActuatorState, t: float) -> None:
        after = self.actuator
        if after.mode is not self._actuator_mode_logged:
            self.log.append(
                t, "actuator", {"event": "mode_change", "mode": after.mode.value}
            )
            self._actuator_mode_logged = after.mode
        stroke = Fraction(self.rack.rack_stroke)
        if after.displacement == stroke and not self._stroke_complete_logged:
            self.log.append(t, "actuator", {"event": "stroke_complete"})
            self._stroke_complete_logged = True
            self._collapse_complete_logged = False
        elif after.displacement < stroke:
            self._stroke_complete_logged = False
        if after.displacement == 0 and not self._collapse_complete_logged:
            self.log.append(t, "actuator", {"event": "collapse_complete"})
            self._collapse_complete_logged = True
        elif after.displacement > 0:
            self._collapse_complete_logged = False

    def _policy_tick(self, t: float) -> None:
        scenario = self.scenario
        policy_dt = self._policy_div * self.dt
        accel_z = (self.drone.velocity[2] - self._last_policy_velocity[2]) / policy_dt
        self._last_policy_velocity = self.drone.velocity.copy()
        self._accel_history.append((t, accel_z))

        falling = freefall_detect(
            self._accel_history,
            thrust_lost=THRUST_LOSS in self.drone.fault_flags,
            window=scenario.policy.freefall_accel_window,
            gravity=scenario.drone.gravity,
            tol=scenario.policy.freefall_accel_tol,
        )
        if falling:
            if not self._freefall_latched:
                self.log.append(t, "policy", {"event": "freefall_detected"})
                self._freefall_latched = True
            # emergency route: no wireless hop, applied this very tick
            if self.actuator.displacement != Fraction(self.rack.rack_stroke):
                self.actuator = emergency_expand(self.actuator)
            return
        self._freefall_latched = False

        if not scenario.policy_enabled:
            return
        action = proximity_policy(self.drone.position, scenario.obstacles, scenario.policy)
        if action is PolicyAction.HOLD:
            return
        if action is not self._last_policy_action:
            self._last_policy_action = action
            self.commands.push(
                GuardCommand(action.value), now=t, latency=self.rack.command_latency
            )
            self.log.append(t, "policy", {"event": "proximity", "action": action.value})

    def _control_tick(self, t: float) -> None:
        sample = self.mocap.sample(t, self.drone.position)
        control_dt = self._control_div * self.dt
        if self._velocity_target is not None:
            out = self.controller.update_velocity(
                self._velocity_target, sample, control_dt, self.total_mass
            )
        else:
            if self.follower is not None:
                target = self.follower.current_target(self.drone.position, control_dt)
                if self.follower.complete and "trajectory" not in self._faults_fired:
                    self._faults_fired.add("trajectory")
                    self.log.append(t, "waypoint", {"event": "trajectory_complete"})
            else:
                target = self._hold_target
            out = self.controller.update(target, sample, control_dt, self.total_mass)
        if out.sensor_fault and SENSOR_LOSS not in self.drone.fault_flags:
            self.drone = self.drone.with_fault(SENSOR_LOSS)
            self.log.append(t, "fault", {"fault": SENSOR_LOSS})
        self.drone = DroneState(
            position=self.drone.position,
            velocity=self.drone.velocity,
            yaw=self.drone.yaw,
            thrust_vector=out.thrust_vector,
            fault_flags=self.drone.fault_flags,
        )

    def _contact_tick(self, t: float, theta: float) -> None:
        cov = self._coverage(theta)
        # broad phase: only obstacles inside the guard's bounding sphere matter
        hub_world = self.drone.position + cov.bounding_center
        near = tuple(
            obs
            for obs in self.scenario.obstacles
            if obs.distance(hub_world) <= cov.bounding_radius + 0.05
        )
        if not near:
            self._contact_force = np.zeros(3)
            self._last_contacts = ()
            return
        res = resolve_contacts(
            self.guard,
            cov,
            near,
            self.scenario.policy,
            self.drone.position,
            self.drone.yaw,
            t,
            already_damaged=self.damaged,
            drone_velocity=self.drone.velocity,
        )
        self._contact_force = res.total_force
        self._last_contacts = res.events
        for ev in res.events:
            self.log.append(
                t,
                "contact",
                {
                    "point": ev.point,
                    "member_index": ev.member_index,
                    "applied_force": ev.applied_force,
                    "local_capacity": ev.local_capacity,
                    "broke": ev.broke,
                    "normal": ev.contact_normal,
                },
            )
        if res.newly_broken and not self.damaged:
            self.damaged = True
            self.log.append(t, "breakage", {"note": "local capacity exceeded"})
        if self.damaged and not self.mission_failed:
            if prop_discs_touched(
                self.scenario.obstacles, self.drone.position, self.scenario.drone
            ):
                self.mission_failed = True
                self.log.append(t, "prop_contact", {})
                self.log.append(t, "mission", {"outcome": "failure"})

    def _telemetry_tick(self, t: float, theta: float) -> None:
        obstacles = self.scenario.obstacles
        dists = [obs.distance(self.drone.position) for obs in obstacles]
        human = [
            d for obs, d in zip(obstacles, dists) if obs.tag is ObstacleTag.HUMAN
        ]
        # pair each contact's bearing with its own force, then order by azimuth
        paired = sorted(
            (
                (bump_hints([ev])[0], ev.applied_force)
                for ev in self._last_contacts
            ),
            key=lambda pair: (pair[0].azimuth, pair[0].elevation),
        )
        frame = {
            "t": t,
            "position": self.drone.position,
            "velocity": self.drone.velocity,
            "guard_radius": self.guard.outer_radius(theta),
            "actuator_mode": self.actuator.mode.value,
            "displacement": float(self.actuator.displacement),
            "contacts": [
                {**hint.as_dict(), "force_n": force} for hint, force in paired
            ],
            "faults": sorted(self.drone.fault_flags),
            "min_obstacle_distance": min(dists) if dists else None,
            "min_human_distance": min(human) if human else None,
            "damaged": self.damaged,
            "mission": "failure" if self.mission_failed else "incomplete",
        }
        self.log.append(t, "telemetry", frame)
        self._last_telemetry = _jsonable(frame)

    @property
    def latest_telemetry(self) -> dict | None:
        return self._last_telemetry

    def step(self) -> None:
        """One physics tick: physics, then the slower loops on their boundaries."""
        t_now = self.tick_index * self.dt
        # scripted events and inbound frames land at tick boundaries
        while self._scripted_faults and self._scripted_faults[0].t_s <= t_now + 1e-12:
            self._fire_fault(self._scripted_faults.pop(0).kind, t_now)
        while self._scripted_frames and self._scripted_frames[0].t_s <= t_now + 1e-12:
            self._apply_frame(self._scripted_frames.pop(0).frame, t_now)
        while self._inbound:
            self._apply_frame(self._inbound.popleft(), t_now)

        self.drone = step_dynamics(
            self.drone,
            self.scenario.drone,
            self.total_mass,
            self.dt,
            external_force=self._contact_force,
        )
        t = (self.tick_index + 1) * self.dt
        if self.drone.position[2] <= 0.0:
            # inelastic ground stop for the airframe itself
            self.drone = DroneState(
                position=np.array([self.drone.position[0], self.drone.position[1], 0.0]),
                velocity=np.zeros(3),
                yaw=self.drone.yaw,
                thrust_vector=self.drone.thrust_vector,
                fault_flags=self.drone.fault_flags,
            )
            if not self._grounded:
                self._grounded = True
                self.log.append(t, "ground", {"event": "body_ground_stop"})
        else:
            self._grounded = False

        if self.tick_index % self._control_div == 0:
            self._control_tick(t)
        if self.tick_index % self._policy_div == 0:
            self._policy_tick(t)

        before = self.actuator
        cmd = self.commands.pop_due(t)
        self.actuator = actuator_step(
            self.actuator,
            self.rack,
            self.dt,
            cmd,
            ring_spec=self.guard.ring_spec,
            deployment=self.guard.deployment,
        )
        self._log_actuator_transitions(before, t)

        theta = self._theta()
        self._contact_tick(t, theta)

        if self.tick_index % self._telemetry_div == 0:
            self._telemetry_tick(t, theta)
        self.tick_index += 1

    def run(self, duration_s: float | None = None) -> EventLog:
        duration = duration_s if duration_s is not None else self.scenario.duration_s
        ticks = round(duration / self.dt)
        for _ in range(ticks):
            self.step()
        self._finish()
        return self.log

    def _finish(self) -> None:
        if self._finished_logged:
            return
        self._finished_logged = True
        t = self.time
        if not self.mission_failed:
            if self.follower is not None and self.follower.complete:
                self.log.append(t, "mission", {"outcome": "complete"})
            else:
                self.log.append(t, "mission", {"outcome": "incomplete"})
        if t > self.scenario.drone.flight_time_budget:
            self.log.append(t, "fault", {"fault": "FlightTimeBudgetExceeded"})


def run_headless(scenario: Scenario, duration_s: float | None = None):
    """Execute a scenario start to finish; returns (EventLog, Metrics)."""
    if not isinstance(scenario, Scenario):
        raise ScenarioValidationError(["scenario: expected a parsed Scenario"])
    sim = Simulation(scenario)
    log = sim.run(duration_s)
    return log, metrics_summary(log)
