"""Scenario documents: the JSON schema the simulator, CLI and service share.

A scenario fixes everything a run needs -- airframe, guard, actuator, policy,
obstacles, flight plan, sensing, rates, seed -- so that (scenario, seed) maps
to exactly one event log. Parsing collects every problem before failing so a
bad file is reported in one shot.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import GuardKind
from .errors import ScenarioValidationError
from .flight import DroneParams, PidGains, Trajectory
from .policy import (
    BoxObstacle,
    ObstacleTag,
    PlaneObstacle,
    PolicyConfig,
    SphereObstacle,
)


@dataclass(frozen=True)
class GuardSettings:
    kind: GuardKind = GuardKind.SPHERE
    unit_count: int = 16
    collapsed_diameter_m: float = 0.52
    expanded_diameter_m: float = 0.85
    ring_mass_kg: float = 0.2
    actuator_mass_kg: float = 1.0
    tube_radius_m: float = 0.01
    hub_offset_m: tuple = (0.0, 0.0, 0.13)
    ring_separation_m: float = 0.25


@dataclass(frozen=True)
class ActuatorSettings:
    full_stroke_time_s: float = 6.0
    command_latency_s: float = 0.02
    jitter_sigma: float = 0.0
    attachment: str = "inner"


@dataclass(frozen=True)
class MocapSettings:
    rate_hz: float = 200.0
    noise_sigma_m: float = 0.0005
    dropout: float = 0.0


@dataclass(frozen=True)
class TickRates:
    physics_hz: int = 1000
    control_hz: int = 200
    policy_hz: int = 50
    telemetry_hz: int = 20


@dataclass(frozen=True)
class FaultEvent:
    t_s: float
    kind: str  # thrust_cut | sensor_loss


@dataclass(frozen=True)
class ScriptedFrame:
    t_s: float
    frame: dict


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    duration_s: float = 10.0
    seed: int = 0
    mode: str = "trajectory"  # trajectory | teleop
    drone: DroneParams = field(default_factory=DroneParams)
    guard: GuardSettings = field(default_factory=GuardSettings)
    actuator: ActuatorSettings = field(default_factory=ActuatorSettings)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    policy_enabled: bool = True
    obstacles: tuple = ()
    initial_position_m: tuple = (0.0, 0.0, 1.0)
    trajectory: Trajectory | None = None
    gains: PidGains = field(default_factory=PidGains)
    mocap: MocapSettings = field(default_factory=MocapSettings)
    rates: TickRates = field(default_factory=TickRates)
    fault_events: tuple = ()
    command_script: tuple = ()
    time_scale: float = 1.0


_OBSTACLE_SHAPES = ("sphere", "plane", "box")
_FAULT_KINDS = ("thrust_cut", "sensor_loss")


def _parse_obstacle(doc: dict, where: str, problems: list):
    shape = doc.get("shape")
    tag_name = doc.get("tag", "structure")
    try:
        tag = ObstacleTag(tag_name)
    except ValueError:
        problems.append(f"{where}.tag: unknown tag {tag_name!r}")
        tag = ObstacleTag.STRUCTURE
    try:
        if shape == "sphere":
            return SphereObstacle(
                center=np.asarray(doc["center"], float), radius=float(doc["radius"]), tag=tag
            )
        if shape == "plane":
            return PlaneObstacle(
                point=np.asarray(doc["point"], float),
                normal=np.asarray(doc["normal"], float),
                tag=tag,
            )
        if shape == "box":
            return BoxObstacle(
                center=np.asarray(doc["center"], float),
                half_extents=np.asarray(doc["half_extents"], float),
                tag=tag,
            )
        problems.append(f"{where}.shape: expected one of {_OBSTACLE_SHAPES}, got {shape!r}")
    except (KeyError, TypeError, ValueError) as exc:
        problems.append(f"{where}: {exc}")
    return None


def _build(cls, doc: dict, where: str, problems: list, **overrides):
    try:
        return cls(**{**doc, **overrides})
    except (TypeError, ValueError) as exc:
        problems.append(f"{where}: {exc}")
        return None


def scenario_from_dict(doc: dict) -> Scenario:
    """Parse and validate a scenario document; raises ScenarioValidationError
    listing every offending field."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioValidationError(["document: expected a JSON object"])
    known = {
        "name", "duration_s", "seed", "mode", "drone", "guard", "actuator",
        "policy", "policy_enabled", "obstacles", "initial_position_m",
        "trajectory", "gains", "mocap", "rates", "fault_events",
        "command_script", "time_scale",
    }
    for key in doc:
        if key not in known:
            problems.append(f"{key}: unknown field")

    duration = doc.get("duration_s", 10.0)
    if not isinstance(duration, (int, float)) or duration <= 0:
        problems.append("duration_s: must be a positive number")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        problems.append("seed: must be an integer")
    mode = doc.get("mode", "trajectory")
    if mode not in ("trajectory", "teleop"):
        problems.append(f"mode: expected trajectory|teleop, got {mode!r}")

    drone_doc = doc.get("drone", {})
    drone = _build(
        DroneParams,
        {
            "base_mass": drone_doc.get("base_mass_kg", 1.2),
            "payload_capacity": drone_doc.get("payload_capacity_kg", 1.6),
            "motor_span": drone_doc.get("motor_span_m", 0.45),
            "prop_diameter": drone_doc.get("prop_diameter_m", 0.1143),
            "overall_span": drone_doc.get("overall_span_m", 0.70),
            "max_total_thrust": drone_doc.get("max_total_thrust_n"),
            "flight_time_budget": drone_doc.get("flight_time_budget_s", 1080.0),
            "thrust_efficiency": drone_doc.get("thrust_efficiency", 1.0),
            "drag_coefficient": drone_doc.get("drag_coefficient", 0.0),
            "gravity": drone_doc.get("gravity", 9.81),
        },
        "drone",
        problems,
    )

    guard_doc = dict(doc.get("guard", {}))
    if "kind" in guard_doc:
        try:
            guard_doc["kind"] = GuardKind(guard_doc["kind"])
        except ValueError:
            problems.append(f"guard.kind: unknown kind {guard_doc['kind']!r}")
            guard_doc.pop("kind")
    if "hub_offset_m" in guard_doc:
        guard_doc["hub_offset_m"] = tuple(guard_doc["hub_offset_m"])
    guard = _build(GuardSettings, guard_doc, "guard", problems)
    if guard is not None:
        if guard.unit_count < 4 or guard.unit_count % 4 != 0:
            problems.append("guard.unit_count: must be a multiple of 4, at least 4")
        if not 0 < guard.collapsed_diameter_m < guard.expanded_diameter_m:
            problems.append("guard: need 0 < collapsed_diameter_m < expanded_diameter_m")

    actuator = _build(ActuatorSettings, doc.get("actuator", {}), "actuator", problems)
    if actuator is not None:
        if actuator.full_stroke_time_s <= 0:
            problems.append("actuator.full_stroke_time_s: must be positive")
        if actuator.attachment not in ("outer", "pivot", "inner"):
            problems.append("actuator.attachment: expected outer|pivot|inner")

    policy_doc = dict(doc.get("policy", {}))
    policy_enabled = bool(policy_doc.pop("enabled", doc.get("policy_enabled", True)))
    policy = _build(
        PolicyConfig,
        {
            "expand_distance": policy_doc.get("expand_distance_m", 1.0),
            "collapse_distance": policy_doc.get("collapse_distance_m", 1.5),
            "human_buffer": policy_doc.get("human_buffer_m", 0.5),
            "freefall_accel_window": policy_doc.get("freefall_accel_window_s", 0.1),
            "freefall_accel_tol": policy_doc.get("freefall_accel_tol", 1.0),
            "capacity_at_rack": policy_doc.get("capacity_at_rack_n", 9.0),
            "capacity_far": policy_doc.get("capacity_far_n", 6.0),
            "spring_stiffness": policy_doc.get("spring_stiffness_n_per_m", 500.0),
            "contact_damping": policy_doc.get("contact_damping", 0.0),
        },
        "policy",
        problems,
    )

    obstacles = []
    for idx, obs_doc in enumerate(doc.get("obstacles", [])):
        obs = _parse_obstacle(obs_doc, f"obstacles[{idx}]", problems)
        if obs is not None:
            obstacles.append(obs)

    trajectory = None
    traj_doc = doc.get("trajectory")
    if traj_doc is not None:
        try:
            waypoints = tuple(
                (np.asarray(wp["position_m"], float), float(wp.get("hold_time_s", 0.0)))
                for wp in traj_doc["waypoints"]
            )
            trajectory = Trajectory(
                waypoints=waypoints,
                tolerance=float(traj_doc.get("tolerance_m", 0.05)),
                cruise_speed=traj_doc.get("cruise_speed_m_s"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"trajectory: {exc}")

    gains_doc = doc.get("gains", {})
    gains = _build(
        PidGains,
        {
            "kp": tuple(gains_doc.get("kp", (2.0, 2.0, 4.0))),
            "ki": tuple(gains_doc.get("ki", (0.1, 0.1, 0.2))),
            "kd": tuple(gains_doc.get("kd", (1.5, 1.5, 2.5))),
            "integrator_clamp": gains_doc.get("integrator_clamp", 0.5),
            "output_clamp": gains_doc.get("output_clamp", 8.0),
        },
        "gains",
        problems,
    )

    mocap_doc = doc.get("mocap", {})
    mocap = _build(MocapSettings, mocap_doc, "mocap", problems)

    rates_doc = doc.get("rates", {})
    rates = _build(TickRates, rates_doc, "rates", problems)
    if rates is not None:
        for name in ("control_hz", "policy_hz", "telemetry_hz"):
            sub = getattr(rates, name)
            if sub <= 0 or rates.physics_hz % sub != 0:
                problems.append(f"rates.{name}: must divide physics_hz evenly")

    faults = []
    for idx, ev in enumerate(doc.get("fault_events", [])):
        kind = ev.get("kind")
        if kind not in _FAULT_KINDS:
            problems.append(f"fault_events[{idx}].kind: expected one of {_FAULT_KINDS}")
            continue
        faults.append(FaultEvent(t_s=float(ev.get("t_s", 0.0)), kind=kind))

    script = []
    for idx, entry in enumerate(doc.get("command_script", [])):
        frame = entry.get("frame")
        if not isinstance(frame, dict) or "type" not in frame:
            problems.append(f"command_script[{idx}].frame: expected an object with a type")
            continue
        script.append(ScriptedFrame(t_s=float(entry.get("t_s", 0.0)), frame=frame))

    initial = tuple(doc.get("initial_position_m", (0.0, 0.0, 1.0)))
    if len(initial) != 3:
        problems.append("initial_position_m: expected [x, y, z]")

    if problems:
        raise ScenarioValidationError(problems)

    return Scenario(
        name=str(doc.get("name", "scenario")),
        duration_s=float(duration),
        seed=seed,
        mode=mode,
        drone=drone,
        guard=guard,
        actuator=actuator,
        policy=policy,
        policy_enabled=policy_enabled,
        obstacles=tuple(obstacles),
        initial_position_m=initial,
        trajectory=trajectory,
        gains=gains,
        mocap=mocap,
        rates=rates,
        fault_events=tuple(sorted(faults, key=lambda f: f.t_s)),
        command_script=tuple(sorted(script, key=lambda s: s.t_s)),
        time_scale=float(doc.get("time_scale", 1.0)),
    )


def scenario_from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([f"document: invalid JSON ({exc})"]) from exc
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_json(Path(path).read_text())


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical round-trippable document for a scenario."""

    def obstacle_doc(obs):
        if isinstance(obs, SphereObstacle):
            return {
                "shape": "sphere",
                "center": list(map(float, obs.center)),
                "radius": float(obs.radius),
                "tag": obs.tag.value,
            }
        if isinstance(obs, PlaneObstacle):
            return {
                "shape": "plane",
                "point": list(map(float, obs.point)),
                "normal": list(map(float, obs.normal)),
                "tag": obs.tag.value,
            }
        return {
            "shape": "box",
            "center": list(map(float, obs.center)),
            "half_extents": list(map(float, obs.half_extents)),
            "tag": obs.tag.value,
        }

    doc = {
        "name": s.name,
        "duration_s": s.duration_s,
        "seed": s.seed,
        "mode": s.mode,
        "drone": {
            "base_mass_kg": s.drone.base_mass,
            "payload_capacity_kg": s.drone.payload_capacity,
            "motor_span_m": s.drone.motor_span,
            "prop_diameter_m": s.drone.prop_diameter,
            "overall_span_m": s.drone.overall_span,
            "max_total_thrust_n": s.drone.max_total_thrust,
            "flight_time_budget_s": s.drone.flight_time_budget,
            "thrust_efficiency": s.drone.thrust_efficiency,
            "drag_coefficient": s.drone.drag_coefficient,
            "gravity": s.drone.gravity,
        },
        "guard": {
            "kind": s.guard.kind.value,
            "unit_count": s.guard.unit_count,
            "collapsed_diameter_m": s.guard.collapsed_diameter_m,
            "expanded_diameter_m": s.guard.expanded_diameter_m,
            "ring_mass_kg": s.guard.ring_mass_kg,
            "actuator_mass_kg": s.guard.actuator_mass_kg,
            "tube_radius_m": s.guard.tube_radius_m,
            "hub_offset_m": list(s.guard.hub_offset_m),
            "ring_separation_m": s.guard.ring_separation_m,
        },
        "actuator": {
            "full_stroke_time_s": s.actuator.full_stroke_time_s,
            "command_latency_s": s.actuator.command_latency_s,
            "jitter_sigma": s.actuator.jitter_sigma,
            "attachment": s.actuator.attachment,
        },
        "policy": {
            "enabled": s.policy_enabled,
            "expand_distance_m": s.policy.expand_distance,
            "collapse_distance_m": s.policy.collapse_distance,
            "human_buffer_m": s.policy.human_buffer,
            "freefall_accel_window_s": s.policy.freefall_accel_window,
            "freefall_accel_tol": s.policy.freefall_accel_tol,
            "capacity_at_rack_n": s.policy.capacity_at_rack,
            "capacity_far_n": s.policy.capacity_far,
            "spring_stiffness_n_per_m": s.policy.spring_stiffness,
            "contact_damping": s.policy.contact_damping,
        },
        "obstacles": [obstacle_doc(o) for o in s.obstacles],
        "initial_position_m": list(s.initial_position_m),
        "gains": {
            "kp": list(s.gains.kp),
            "ki": list(s.gains.ki),
            "kd": list(s.gains.kd),
            "integrator_clamp": s.gains.integrator_clamp,
            "output_clamp": s.gains.output_clamp,
        },
        "mocap": {
            "rate_hz": s.mocap.rate_hz,
            "noise_sigma_m": s.mocap.noise_sigma_m,
            "dropout": s.mocap.dropout,
        },
        "rates": {
            "physics_hz": s.rates.physics_hz,
            "control_hz": s.rates.control_hz,
            "policy_hz": s.rates.policy_hz,
            "telemetry_hz": s.rates.telemetry_hz,
        },
        "fault_events": [{"t_s": f.t_s, "kind": f.kind} for f in s.fault_events],
        "command_script": [{"t_s": c.t_s, "frame": c.frame} for c in s.command_script],
        "time_scale": s.time_scale,
    }
    if s.trajectory is not None:
        doc["trajectory"] = {
            "waypoints": [
                {
                    "position_m": list(map(float, wp.position)),
                    "hold_time_s": wp.hold_time,
                }
                for wp in s.trajectory.waypoints
            ],
            "tolerance_m": s.trajectory.tolerance,
            "cruise_speed_m_s": s.trajectory.cruise_speed,
        }
    return doc
