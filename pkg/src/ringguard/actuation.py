"""Rack-and-pinion actuation coupling servo commands to the deployment angle.

A central pinion drives four racks outward at the same rate; the rack ends
push one joint family (the inner connection joints by default) radially, so
rack displacement maps directly onto that family's radius:

    attached_radius(delta) = attached_radius(theta_min) + delta

The servo is modeled as constant-rate: the full stroke always takes
``full_stroke_time`` (6 s nominal), optionally scaled by a per-run jitter
factor. Displacement is kept as an exact fraction internally so that equal
expand/collapse durations return the rack to its starting point exactly and
saturation never overshoots.

Non-emergency commands pass through a latency queue (the wireless hop to the
servo microcontroller); emergency expansion bypasses it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

import numpy as np

from .assembly import GuardConfiguration
from .errors import DeploymentRangeError, RingDefinitionError
from .scissor import DeploymentState, RingSpec, family_radius, theta_for_radius


class ActuatorMode(str, Enum):
    IDLE = "idle"
    EXPANDING = "expanding"
    COLLAPSING = "collapsing"
    SEEK = "seek"


@dataclass(frozen=True)
class GuardCommand:
    """A guard-size command as it arrives over the wire or from the policy."""

    action: str  # expand | collapse | stop | seek | emergency
    radius_m: float | None = None

    def __post_init__(self):
        if self.action not in ("expand", "collapse", "stop", "seek", "emergency"):
            raise ValueError(f"unknown guard action {self.action!r}")
        if self.action == "seek" and self.radius_m is None:
            raise ValueError("seek needs a target radius")

    @property
    def is_emergency(self) -> bool:
        return self.action == "emergency"


def _default_rack_directions() -> np.ndarray:
    az = np.array([0.0, 0.5, 1.0, 1.5]) * math.pi
    return np.column_stack([np.cos(az), np.sin(az)])


@dataclass(frozen=True)
class RackPinionSpec:
    rack_stroke: float
    full_stroke_time: float = 6.0
    pinion_radius: float = 0.02
    attachment: str = "inner"
    command_latency: float = 0.02
    jitter_sigma: float = 0.0
    rack_directions: np.ndarray = field(default_factory=_default_rack_directions)

    def __post_init__(self):
        if self.rack_stroke <= 0:
            raise RingDefinitionError("rack stroke must be positive")
        if self.full_stroke_time <= 0:
            raise RingDefinitionError("stroke time must be positive")
        dots = self.rack_directions @ self.rack_directions.T
        if not np.allclose(np.abs(dots[0]), [1, 0, 1, 0], atol=1e-9):
            raise RingDefinitionError("rack directions must be 90 degrees apart")

    @property
    def nominal_rate(self) -> float:
        """Rack speed in m/s; also the Lipschitz bound on displacement."""
        return self.rack_stroke / self.full_stroke_time


@dataclass(frozen=True)
class ActuatorState:
    """Rack displacement plus motion mode. Immutable; stepped by the sim tick."""

    displacement: Fraction = Fraction(0)
    mode: ActuatorMode = ActuatorMode.IDLE
    seek_target: Fraction | None = None
    rate_scale: float = 1.0  # stroke-time multiplier drawn once per run

    @property
    def displacement_m(self) -> float:
        return float(self.displacement)


def rack_spec_for_band(
    ring_spec: RingSpec,
    deployment: DeploymentState,
    full_stroke_time: float = 6.0,
    attachment: str = "inner",
    command_latency: float = 0.02,
    jitter_sigma: float = 0.0,
    pinion_radius: float = 0.02,
) -> RackPinionSpec:
    """Stroke length that spans a deployment band at the attachment family."""
    lo = family_radius(ring_spec, deployment.theta_min, attachment)
    hi = family_radius(ring_spec, deployment.theta_max, attachment)
    return RackPinionSpec(
        rack_stroke=hi - lo,
        full_stroke_time=full_stroke_time,
        attachment=attachment,
        command_latency=command_latency,
        jitter_sigma=jitter_sigma,
        pinion_radius=pinion_radius,
    )


def rack_spec_for_guard(guard: GuardConfiguration, **kwargs) -> RackPinionSpec:
    return rack_spec_for_band(guard.ring_spec, guard.deployment, **kwargs)


def displacement_to_theta(
    spec: RackPinionSpec,
    ring_spec: RingSpec,
    deployment: DeploymentState,
    displacement: float,
) -> float:
    """Deployment angle produced by a rack displacement.

    delta = 0 parks at theta_min, delta = rack_stroke at theta_max; the
    attached joint family's radius grows linearly with delta in between.
    """
    delta = float(displacement)
    if not (-1e-12 <= delta <= spec.rack_stroke + 1e-12):
        raise DeploymentRangeError(
            f"rack displacement {delta:.6f} m outside stroke",
            band=(0.0, spec.rack_stroke),
        )
    collapsed = family_radius(ring_spec, deployment.theta_min, spec.attachment)
    return theta_for_radius(
        ring_spec,
        collapsed + delta,
        spec.attachment,
        bounds=(deployment.theta_min, deployment.theta_max),
    )


def theta_to_displacement(
    spec: RackPinionSpec,
    ring_spec: RingSpec,
    deployment: DeploymentState,
    theta: float,
) -> float:
    collapsed = family_radius(ring_spec, deployment.theta_min, spec.attachment)
    return family_radius(ring_spec, theta, spec.attachment) - collapsed


def seek_displacement_for_radius(
    spec: RackPinionSpec,
    ring_spec: RingSpec,
    deployment: DeploymentState,
    outer_radius: float,
) -> float:
    """Rack displacement whose deployment angle yields the target outer radius."""
    theta = theta_for_radius(
        ring_spec, outer_radius, "outer", bounds=(deployment.theta_min, deployment.theta_max)
    )
    return theta_to_displacement(spec, ring_spec, deployment, theta)


def apply_command(
    state: ActuatorState,
    spec: RackPinionSpec,
    command: GuardCommand,
    ring_spec: RingSpec | None = None,
    deployment: DeploymentState | None = None,
) -> ActuatorState:
    """Mode change for one command. Seek needs the ring to resolve its target."""
    if command.action in ("expand", "emergency"):
        return replace(state, mode=ActuatorMode.EXPANDING, seek_target=None)
    if command.action == "collapse":
        return replace(state, mode=ActuatorMode.COLLAPSING, seek_target=None)
    if command.action == "stop":
        return replace(state, mode=ActuatorMode.IDLE, seek_target=None)
    if ring_spec is None or deployment is None:
        raise ValueError("seek commands need the ring spec and deployment band")
    delta = seek_displacement_for_radius(spec, ring_spec, deployment, command.radius_m)
    return replace(state, mode=ActuatorMode.SEEK, seek_target=Fraction(delta))


def emergency_expand(state: ActuatorState) -> ActuatorState:
    """Immediate expansion, bypassing the command latency queue. Idempotent."""
    return replace(state, mode=ActuatorMode.EXPANDING, seek_target=None)


def step(
    state: ActuatorState,
    spec: RackPinionSpec,
    dt: float,
    command: GuardCommand | None = None,
    ring_spec: RingSpec | None = None,
    deployment: DeploymentState | None = None,
) -> ActuatorState:
    """Advance the rack one tick toward its mode's target at constant rate.

    The rack never overshoots a target or the stroke limits; reaching the
    target settles the mode back to idle.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if command is not None:
        state = apply_command(state, spec, command, ring_spec, deployment)

    stroke = Fraction(spec.rack_stroke)
    if state.mode is ActuatorMode.EXPANDING:
        target = stroke
    elif state.mode is ActuatorMode.COLLAPSING:
        target = Fraction(0)
    elif state.mode is ActuatorMode.SEEK:
        target = min(max(state.seek_target, Fraction(0)), stroke)
    else:
        return state

    step_size = (
        stroke * Fraction(dt) / Fraction(spec.full_stroke_time * state.rate_scale)
    )
    gap = target - state.displacement
    if gap > 0:
        new_disp = state.displacement + min(step_size, gap)
    elif gap < 0:
        new_disp = state.displacement - min(step_size, -gap)
    else:
        new_disp = state.displacement
    if new_disp == target:
        return replace(state, displacement=new_disp, mode=ActuatorMode.IDLE, seek_target=None)
    return replace(state, displacement=new_disp)


@dataclass
class _QueuedCommand:
    apply_at: float
    sequence: int
    command: GuardCommand


class CommandQueue:
    """Latency queue drained at tick boundaries; one resolved command per drain.

    Within a tick the latest command wins, except that an emergency command
    outranks everything queued alongside it.
    """

    def __init__(self):
        self._pending: list[_QueuedCommand] = []
        self._sequence = 0

    def push(self, command: GuardCommand, now: float, latency: float) -> None:
        delay = 0.0 if command.is_emergency else latency
        self._pending.append(_QueuedCommand(now + delay, self._sequence, command))
        self._sequence += 1

    def pop_due(self, now: float) -> GuardCommand | None:
        due = [q for q in self._pending if q.apply_at <= now + 1e-12]
        if not due:
            return None
        self._pending = [q for q in self._pending if q.apply_at > now + 1e-12]
        emergencies = [q for q in due if q.command.is_emergency]
        chosen = max(emergencies or due, key=lambda q: q.sequence)
        return chosen.command

    def __len__(self) -> int:
        return len(self._pending)
