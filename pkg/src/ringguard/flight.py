"""Quadrotor flight model: point-mass dynamics, PID position control,
motion-capture sensing, trajectory following, and payload feasibility.

The airframe is deliberately simple: a point mass with a yaw-only attitude.
The controller commands a thrust vector whose tilt from vertical is capped at
30 degrees; full rotor-level dynamics would change nothing about the guard,
which is the part this package actually studies.

Integration is velocity Verlet (kick-drift-kick), which reproduces constant-
acceleration arcs exactly -- free-fall trajectories match the closed form to
round-off, and ballistic mechanical energy is conserved to ~1e-12 per second
at the default 1 kHz physics rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

GRAVITY = 9.81  # m/s^2

THRUST_LOSS = "ThrustLoss"
SENSOR_LOSS = "SensorLoss"

# Hold the last command and raise a fault after this long without mocap.
SENSOR_TIMEOUT = 0.1


def _vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=float).reshape(3)
    return v.copy()


@dataclass(frozen=True)
class DroneParams:
    """Airframe constants. Defaults follow the reference quadrotor build:
    1.2 kg frame lifting up to 1.6 kg of payload, 45 cm motor-to-motor,
    4x4.5 inch propellers, 70 cm overall span, ~18 min flight budget."""

    base_mass: float = 1.2
    payload_capacity: float = 1.6
    motor_span: float = 0.45
    prop_diameter: float = 0.1143
    overall_span: float = 0.70
    max_total_thrust: float | None = None
    flight_time_budget: float = 1080.0
    thrust_efficiency: float = 1.0
    drag_coefficient: float = 0.0  # linear, N per m/s
    gravity: float = GRAVITY
    max_tilt: float = math.radians(30.0)

    def __post_init__(self):
        if self.max_total_thrust is None:
            lift = (self.base_mass + self.payload_capacity) * self.gravity * 1.3
            object.__setattr__(self, "max_total_thrust", lift)
        if not 0.0 < self.thrust_efficiency <= 1.0:
            raise ValueError("thrust_efficiency must be in (0, 1]")
        if self.base_mass <= 0 or self.payload_capacity < 0:
            raise ValueError("masses must be positive")
        # spans quoted with the same rounding the airframe datasheet uses
        expected = self.motor_span + 2.0 * self.prop_diameter
        if abs(self.overall_span - expected) > 0.03:
            raise ValueError(
                f"overall span {self.overall_span} m inconsistent with motors+props"
                f" ({expected:.3f} m)"
            )

    @property
    def prop_tip_radius(self) -> float:
        return self.overall_span / 2.0

    def prop_disc_centers(self) -> np.ndarray:
        """Four propeller disc centers in the body frame (z = 0 plane)."""
        r = self.motor_span / 2.0
        az = np.radians([45.0, 135.0, 225.0, 315.0])
        return np.column_stack([r * np.cos(az), r * np.sin(az), np.zeros(4)])

    @property
    def prop_radius(self) -> float:
        return self.prop_diameter / 2.0


@dataclass(frozen=True)
class DroneState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    thrust_vector: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fault_flags: frozenset = frozenset()

    @property
    def thrust_command(self) -> float:
        return float(np.linalg.norm(self.thrust_vector))

    def with_fault(self, flag: str) -> "DroneState":
        return replace(self, fault_flags=self.fault_flags | {flag})


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    margin_kg: float


def payload_feasibility(params: DroneParams, guard_total_mass: float) -> FeasibilityReport:
    """Can the airframe lift this guard (structure plus actuator)?"""
    if guard_total_mass < 0:
        raise ValueError("guard mass cannot be negative")
    margin = params.payload_capacity - guard_total_mass
    return FeasibilityReport(feasible=margin >= 0.0, margin_kg=margin)


def step_dynamics(
    state: DroneState,
    params: DroneParams,
    total_mass: float,
    dt: float,
    external_force=None,
) -> DroneState:
    """One velocity-Verlet step of the point-mass translational dynamics.

    ``external_force`` (N, world frame) carries contact reactions resolved on
    the previous tick. A ThrustLoss fault forces the produced thrust to zero
    regardless of the commanded vector.
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must be in (0, 0.01] s")
    ext = np.zeros(3) if external_force is None else _vec3(external_force)
    gravity_acc = np.array([0.0, 0.0, -params.gravity])

    if THRUST_LOSS in state.fault_flags:
        thrust = np.zeros(3)
    else:
        thrust = params.thrust_efficiency * state.thrust_vector

    def accel(vel: np.ndarray) -> np.ndarray:
        drag = -params.drag_coefficient * vel
        return (thrust + ext + drag) / total_mass + gravity_acc

    a0 = accel(state.velocity)
    v_half = state.velocity + 0.5 * dt * a0
    new_pos = state.position + dt * v_half
    a1 = accel(v_half)
    new_vel = v_half + 0.5 * dt * a1
    return replace(state, position=new_pos, velocity=new_vel)


@dataclass(frozen=True)
class PidGains:
    """Per-axis (x, y, z) position gains mapping error to acceleration.

    These are tuning defaults validated by the step-response gate, not
    identified constants.
    """

    kp: tuple = (2.0, 2.0, 4.0)
    ki: tuple = (0.1, 0.1, 0.2)
    kd: tuple = (1.5, 1.5, 2.5)
    # clamped tight: long cruise legs would otherwise wind up a standing
    # push that parks the vehicle outside the waypoint tolerance
    integrator_clamp: float = 0.5  # m*s of accumulated error per axis
    output_clamp: float = 8.0  # m/s^2 per axis before tilt shaping

    def __post_init__(self):
        if any(g < 0 for g in (*self.kp, *self.ki, *self.kd)):
            raise ValueError("gains must be non-negative")
        if self.integrator_clamp <= 0 or self.output_clamp <= 0:
            raise ValueError("clamps must be positive")


@dataclass(frozen=True)
class MocapSample:
    timestamp: float
    position: np.ndarray
    valid: bool = True


class MotionCaptureSim:
    """External position sensing at a fixed rate with Gaussian noise.

    Stands in for a hall of tracking cameras; ``dropout`` marks samples
    invalid to exercise the sensor-loss path.
    """

    def __init__(
        self,
        rate_hz: float = 200.0,
        noise_sigma: float = 0.0005,
        dropout: float = 0.0,
        rng: np.random.Generator | None = None,
    ):
        self.rate_hz = rate_hz
        self.noise_sigma = noise_sigma
        self.dropout = dropout
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def sample(self, t: float, true_position) -> MocapSample:
        pos = _vec3(true_position)
        if self.noise_sigma > 0:
            pos = pos + self.rng.normal(0.0, self.noise_sigma, 3)
        valid = True
        if self.dropout > 0 and self.rng.random() < self.dropout:
            valid = False
        return MocapSample(timestamp=t, position=pos, valid=valid)


@dataclass(frozen=True)
class ControlOutput:
    thrust_vector: np.ndarray
    sensor_fault: bool = False


class PositionController:
    """PID on mocap position with derivative on measurement.

    The altitude axis adds a gravity feedforward of total_mass * g, so zero
    error commands exactly a hover. Losing mocap for longer than
    SENSOR_TIMEOUT holds the last command and reports a sensor fault.
    """

    def __init__(self, gains: PidGains, params: DroneParams):
        self.gains = gains
        self.params = params
        self._integral = np.zeros(3)
        self._last_position: np.ndarray | None = None
        self._last_time: float | None = None
        self._last_output: np.ndarray | None = None

    def reset(self) -> None:
        self._integral = np.zeros(3)
        self._last_position = None
        self._last_time = None
        self._last_output = None

    def _shape_thrust(self, accel_cmd: np.ndarray, total_mass: float) -> np.ndarray:
        g = self.params.gravity
        clamp = self.gains.output_clamp
        accel = np.clip(accel_cmd, -clamp, clamp)
        vertical = max(0.0, g + accel[2])
        horizontal = accel[:2].copy()
        # tilt cap: |F_h| <= tan(max_tilt) * F_z
        max_h = math.tan(self.params.max_tilt) * vertical
        h_norm = float(np.linalg.norm(horizontal))
        if h_norm > max_h and h_norm > 0:
            horizontal *= max_h / h_norm
        force = total_mass * np.array([horizontal[0], horizontal[1], vertical])
        norm = float(np.linalg.norm(force))
        if norm > self.params.max_total_thrust:
            force *= self.params.max_total_thrust / norm
        return force

    def hover_command(self, total_mass: float) -> np.ndarray:
        return np.array([0.0, 0.0, total_mass * self.params.gravity])

    def update(
        self,
        target,
        sample: MocapSample,
        dt: float,
        total_mass: float,
    ) -> ControlOutput:
        now = sample.timestamp
        stale = (
            not sample.valid
            and self._last_time is not None
            and now - self._last_time > SENSOR_TIMEOUT
        )
        if not sample.valid:
            held = (
                self._last_output
                if self._last_output is not None
                else self.hover_command(total_mass)
            )
            return ControlOutput(thrust_vector=held.copy(), sensor_fault=stale)

        pos = sample.position
        if self._last_position is None or self._last_time is None or now <= self._last_time:
            velocity = np.zeros(3)
        else:
            velocity = (pos - self._last_position) / (now - self._last_time)
        error = _vec3(target) - pos
        self._integral = np.clip(
            self._integral + error * dt,
            -self.gains.integrator_clamp,
            self.gains.integrator_clamp,
        )
        accel = (
            np.asarray(self.gains.kp) * error
            + np.asarray(self.gains.ki) * self._integral
            - np.asarray(self.gains.kd) * velocity
        )
        force = self._shape_thrust(accel, total_mass)
        self._last_position = pos
        self._last_time = now
        self._last_output = force
        return ControlOutput(thrust_vector=force)

    def update_velocity(
        self,
        velocity_target,
        sample: MocapSample,
        dt: float,
        total_mass: float,
        kv: float = 2.0,
    ) -> ControlOutput:
        """Velocity-setpoint mode for teleoperation (P on measured velocity)."""
        now = sample.timestamp
        if not sample.valid:
            held = (
                self._last_output
                if self._last_output is not None
                else self.hover_command(total_mass)
            )
            stale = self._last_time is not None and now - self._last_time > SENSOR_TIMEOUT
            return ControlOutput(thrust_vector=held.copy(), sensor_fault=stale)
        pos = sample.position
        if self._last_position is None or self._last_time is None or now <= self._last_time:
            velocity = np.zeros(3)
        else:
            velocity = (pos - self._last_position) / (now - self._last_time)
        accel = kv * (_vec3(velocity_target) - velocity)
        force = self._shape_thrust(accel, total_mass)
        self._last_position = pos
        self._last_time = now
        self._last_output = force
        return ControlOutput(thrust_vector=force)


def pid_update(
    gains: PidGains,
    target,
    mocap_history: list[MocapSample],
    dt: float,
    total_mass: float,
    params: DroneParams | None = None,
    controller: PositionController | None = None,
) -> ControlOutput:
    """One-shot functional wrapper over PositionController.

    Feeds the history through a fresh controller (or the one provided) and
    returns the final command; at least one sample is required.
    """
    if not mocap_history:
        raise ValueError("need at least one mocap sample")
    ctl = controller or PositionController(gains, params or DroneParams())
    out = None
    for sample in mocap_history:
        out = ctl.update(target, sample, dt, total_mass)
    return out


@dataclass(frozen=True)
class Waypoint:
    position: np.ndarray
    hold_time: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """Ordered waypoints with an arrival tolerance.

    ``cruise_speed`` (optional) turns the follower into a moving-carrot
    planner: the emitted target advances toward the active waypoint at that
    speed instead of jumping, which is how constant-speed approaches are
    scripted.
    """

    waypoints: tuple
    tolerance: float = 0.05
    cruise_speed: float | None = None

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("trajectory needs at least one waypoint")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(
            self,
            "waypoints",
            tuple(
                wp if isinstance(wp, Waypoint) else Waypoint(_vec3(wp[0]), float(wp[1]))
                for wp in self.waypoints
            ),
        )


class TrajectoryFollower:
    """Emits the active waypoint (or carrot) as the PID target.

    Advances once the drone has stayed within tolerance for the waypoint's
    hold time; after the last waypoint it holds there and reports completion.
    """

    def __init__(self, trajectory: Trajectory, start_position):
        self.trajectory = trajectory
        self._index = 0
        self._settled = 0.0
        self._carrot = _vec3(start_position)
        self.complete = False

    @property
    def progress_index(self) -> int:
        return self._index

    def current_target(self, drone_position, dt: float) -> np.ndarray:
        wps = self.trajectory.waypoints
        if self.complete:
            return wps[-1].position.copy()
        active = wps[self._index]
        pos = _vec3(drone_position)

        if self.trajectory.cruise_speed is not None:
            gap = active.position - self._carrot
            dist = float(np.linalg.norm(gap))
            step = self.trajectory.cruise_speed * dt
            if dist > step:
                self._carrot = self._carrot + gap * (step / dist)
            else:
                self._carrot = active.position.copy()
            target = self._carrot.copy()
        else:
            target = active.position.copy()

        if float(np.linalg.norm(pos - active.position)) <= self.trajectory.tolerance:
            self._settled += dt
            if self._settled >= active.hold_time:
                self._settled = 0.0
                if self._index + 1 < len(wps):
                    self._index += 1
                else:
                    self.complete = True
        else:
            self._settled = 0.0
        return target
