"""Safety policies: when to expand, what the guard can take, and how contacts resolve.

Three triggers can grow the guard, in strict priority order:
emergency (operator button) > free fall > proximity. The proximity rule is a
hysteresis band -- expand when the nearest obstacle is closer than
``expand_distance``, collapse only once it is farther than
``collapse_distance`` -- so the guard does not chatter at the threshold.
Human-tagged obstacles get an extra ``human_buffer`` on both thresholds.

Contact forces follow a spring model: member penetration depth d into an
obstacle produces a reaction k*d along the contact normal, applied to the
drone body. Each member's force capacity depends on where it sits relative to
the four actuation racks: full capacity on a rack azimuth, tapering linearly
to the minimum at 45 degrees (the farthest a point can be from a rack).
Exceeding local capacity breaks the structure, permanently for the run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .assembly import CoverageVolume, GuardConfiguration
from .geometry import closest_point_on_segments


class ObstacleTag(str, Enum):
    HUMAN = "human"
    STRUCTURE = "structure"
    GROUND = "ground"


@dataclass(frozen=True)
class SphereObstacle:
    center: np.ndarray
    radius: float
    tag: ObstacleTag = ObstacleTag.STRUCTURE

    def distance(self, point) -> float:
        return float(np.linalg.norm(np.asarray(point, float) - self.center)) - self.radius


@dataclass(frozen=True)
class PlaneObstacle:
    """Solid half-space behind the plane; ``normal`` points into free space."""

    point: np.ndarray
    normal: np.ndarray
    tag: ObstacleTag = ObstacleTag.STRUCTURE

    def __post_init__(self):
        n = np.asarray(self.normal, float)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        object.__setattr__(self, "point", np.asarray(self.point, float))

    def distance(self, point) -> float:
        return float((np.asarray(point, float) - self.point) @ self.normal)


@dataclass(frozen=True)
class BoxObstacle:
    center: np.ndarray
    half_extents: np.ndarray
    tag: ObstacleTag = ObstacleTag.STRUCTURE

    def distance(self, point) -> float:
        q = np.abs(np.asarray(point, float) - self.center) - self.half_extents
        outside = float(np.linalg.norm(np.maximum(q, 0.0)))
        inside = float(min(np.max(q), 0.0))
        return outside + inside


Obstacle = SphereObstacle | PlaneObstacle | BoxObstacle


@dataclass(frozen=True)
class PolicyConfig:
    expand_distance: float = 1.0
    collapse_distance: float = 1.5
    human_buffer: float = 0.5
    freefall_accel_window: float = 0.1
    freefall_accel_tol: float = 1.0  # m/s^2 around -g
    capacity_at_rack: float = 9.0
    capacity_far: float = 6.0
    spring_stiffness: float = 500.0  # N/m
    contact_damping: float = 0.0  # N per m/s of normal approach speed

    def __post_init__(self):
        if self.collapse_distance <= self.expand_distance:
            raise ValueError("collapse_distance must exceed expand_distance (hysteresis)")
        if not 0 < self.capacity_far <= self.capacity_at_rack:
            raise ValueError("capacities must satisfy 0 < far <= at_rack")
        if self.spring_stiffness <= 0:
            raise ValueError("spring stiffness must be positive")


class PolicyAction(str, Enum):
    EXPAND = "expand"
    COLLAPSE = "collapse"
    HOLD = "hold"


def proximity_policy(drone_position, obstacles, config: PolicyConfig) -> PolicyAction:
    """Hysteresis rule on the nearest-obstacle distance from the body center.

    HOLD (between the thresholds) issues no actuator command, so whatever
    motion is in progress runs to completion -- that is the hysteresis.
    """
    if not obstacles:
        return PolicyAction.COLLAPSE
    want_expand = False
    all_clear = True
    for obs in obstacles:
        buffer = config.human_buffer if obs.tag is ObstacleTag.HUMAN else 0.0
        d = obs.distance(drone_position)
        if d < config.expand_distance + buffer:
            want_expand = True
        if d <= config.collapse_distance + buffer:
            all_clear = False
    if want_expand:
        return PolicyAction.EXPAND
    if all_clear:
        return PolicyAction.COLLAPSE
    return PolicyAction.HOLD


def freefall_detect(
    accel_history,
    thrust_lost: bool,
    window: float = 0.1,
    gravity: float = 9.81,
    tol: float = 1.0,
) -> bool:
    """True when the vehicle has been falling for a full window, or thrust is
    known lost.

    ``accel_history`` is an iterable of (t, vertical_accel) samples, newest
    last. The accelerometer route requires every sample inside the window to
    read within ``tol`` of -g, and the history to actually span the window.
    """
    if thrust_lost:
        return True
    samples = list(accel_history)
    if not samples:
        return False
    t_now = samples[-1][0]
    if samples[0][0] > t_now - window + 1e-12:
        return False  # history does not cover the window yet
    in_window = [a for (t, a) in samples if t > t_now - window - 1e-12]
    return all(abs(a + gravity) <= tol for a in in_window)


@dataclass(frozen=True)
class ContactEvent:
    time: float
    point: np.ndarray  # world frame
    body_point: np.ndarray  # drone body frame, for capacity/bearing queries
    member_index: int
    applied_force: float  # N
    local_capacity: float  # N
    broke: bool
    contact_normal: np.ndarray  # world frame, pushes the drone away


@dataclass(frozen=True)
class ContactResolution:
    events: tuple
    total_force: np.ndarray  # N, world frame, applied to the drone body
    newly_broken: bool


def local_capacity(
    point_body,
    config: PolicyConfig,
    guard: GuardConfiguration | None = None,
    coverage: CoverageVolume | None = None,
) -> float:
    """Force capacity at a structure point, from its bearing to the racks.

    The in-plane angular distance alpha to the nearest rack runs 0..45 deg;
    capacity interpolates linearly from ``capacity_at_rack`` down to
    ``capacity_far``. Points with no in-plane bearing (on the hub axis, e.g.
    a dome zenith) are as far from every rack as possible.

    With ``coverage`` given, the point is validated to lie on the structure
    (within the member tube radius).
    """
    p = np.asarray(point_body, dtype=float)
    hub = guard.hub_offset if guard is not None else np.zeros(3)
    rack_az = (
        guard.rack_azimuths if guard is not None else np.array([0.0, 0.5, 1.0, 1.5]) * math.pi
    )
    if coverage is not None:
        tube = coverage.swept_solid["tubes"][0]["tube_radius"]
        _, dists = closest_point_on_segments(
            p, coverage.member_segments[:, 0], coverage.member_segments[:, 1]
        )
        if float(np.min(dists)) > tube + 1e-6:
            raise ValueError("contact point does not lie on the guard structure")
    rel = p - hub
    alpha_max = math.pi / 4.0
    if math.hypot(rel[0], rel[1]) < 1e-9:
        alpha = alpha_max
    else:
        az = math.atan2(rel[1], rel[0])
        diffs = np.angle(np.exp(1j * (az - rack_az)))
        alpha = min(alpha_max, float(np.min(np.abs(diffs))))
    span = config.capacity_at_rack - config.capacity_far
    return config.capacity_at_rack - span * (alpha / alpha_max)


def _deepest_against_plane(segments, obstacle: PlaneObstacle):
    d = (segments - obstacle.point) @ obstacle.normal  # (M, 2) endpoint distances
    per_segment = d.min(axis=1)
    idx = int(np.argmin(per_segment))
    depth = -float(per_segment[idx])
    if depth <= 0:
        return None
    end = int(np.argmin(d[idx]))
    return depth, segments[idx, end].copy(), obstacle.normal.copy(), idx


def _deepest_against_sphere(segments, obstacle: SphereObstacle):
    pts, dists = closest_point_on_segments(obstacle.center, segments[:, 0], segments[:, 1])
    idx = int(np.argmin(dists))
    depth = obstacle.radius - float(dists[idx])
    if depth <= 0:
        return None
    contact = pts[idx]
    n = contact - obstacle.center
    norm = float(np.linalg.norm(n))
    normal = n / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
    return depth, contact.copy(), normal, idx


def _deepest_against_box(segments, obstacle: BoxObstacle, samples: int = 9):
    ts = np.linspace(0.0, 1.0, samples)
    pts = (
        segments[:, None, 0, :] * (1.0 - ts)[None, :, None]
        + segments[:, None, 1, :] * ts[None, :, None]
    ).reshape(-1, 3)
    q = np.abs(pts - obstacle.center) - obstacle.half_extents
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
    inside = np.minimum(q.max(axis=1), 0.0)
    sdf = outside + inside
    flat_idx = int(np.argmin(sdf))
    depth = -float(sdf[flat_idx])
    if depth <= 0:
        return None
    contact = pts[flat_idx]
    # gradient of the SDF by central differences for the push-out direction
    eps = 1e-6
    grad = np.array(
        [
            obstacle.distance(contact + np.eye(3)[k] * eps)
            - obstacle.distance(contact - np.eye(3)[k] * eps)
            for k in range(3)
        ]
    )
    norm = float(np.linalg.norm(grad))
    normal = grad / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
    return depth, contact.copy(), normal, flat_idx // samples


def resolve_contacts(
    guard: GuardConfiguration,
    coverage: CoverageVolume,
    obstacles,
    config: PolicyConfig,
    drone_position,
    yaw: float,
    t: float,
    already_damaged: bool = False,
    drone_velocity=None,
) -> ContactResolution:
    """Spring contacts between guard members and obstacles for one tick.

    Coverage is given in the body frame; the deepest-penetrating member per
    obstacle defines that obstacle's spring compression and the logged event.
    Damage does not delete members (a cracked guard still occupies space);
    it only voids the propeller protection, which the engine checks separately.
    """
    pos = np.asarray(drone_position, float)
    segs = coverage.member_segments
    if yaw != 0.0:
        c, s = math.cos(yaw), math.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        world_segs = segs @ rot.T + pos
    else:
        world_segs = segs + pos
    events = []
    total = np.zeros(3)
    newly_broken = False
    vel = np.zeros(3) if drone_velocity is None else np.asarray(drone_velocity, float)
    for obs in obstacles:
        if isinstance(obs, PlaneObstacle):
            hit = _deepest_against_plane(world_segs, obs)
        elif isinstance(obs, SphereObstacle):
            hit = _deepest_against_sphere(world_segs, obs)
        else:
            hit = _deepest_against_box(world_segs, obs)
        if hit is None:
            continue
        depth, point, normal, member_idx = hit
        force = config.spring_stiffness * depth
        if config.contact_damping > 0.0:
            approach = -float(vel @ normal)
            force = max(0.0, force + config.contact_damping * approach)
        body_point = point - pos
        if yaw != 0.0:
            body_point = np.array(
                [
                    body_point[0] * math.cos(-yaw) - body_point[1] * math.sin(-yaw),
                    body_point[0] * math.sin(-yaw) + body_point[1] * math.cos(-yaw),
                    body_point[2],
                ]
            )
        capacity = local_capacity(body_point, config, guard)
        broke = force > capacity
        newly_broken = newly_broken or (broke and not already_damaged)
        events.append(
            ContactEvent(
                time=t,
                point=point,
                body_point=body_point,
                member_index=int(member_idx),
                applied_force=force,
                local_capacity=capacity,
                broke=broke,
                contact_normal=normal,
            )
        )
        total = total + force * normal
    return ContactResolution(events=tuple(events), total_force=total, newly_broken=newly_broken)


@dataclass(frozen=True)
class BumpHint:
    """Bearing of a contact for the operator display: which way the obstacle is."""

    azimuth: float  # rad, body frame
    elevation: float  # rad

    def as_dict(self) -> dict:
        return {"azimuth_rad": self.azimuth, "elevation_rad": self.elevation}


def bump_hints(events) -> list[BumpHint]:
    """Obstacle bearings (opposite the contact normals), sorted by azimuth."""
    hints = []
    for ev in events:
        d = -ev.contact_normal
        az = math.atan2(d[1], d[0])
        el = math.atan2(d[2], math.hypot(d[0], d[1]))
        hints.append(BumpHint(azimuth=az, elevation=el))
    return sorted(hints, key=lambda h: (h.azimuth, h.elevation))


def prop_discs_touched(obstacles, drone_position, params) -> bool:
    """True if any obstacle reaches a propeller disc (body z=0 plane discs)."""
    pos = np.asarray(drone_position, float)
    centers = params.prop_disc_centers() + pos
    r = params.prop_radius
    z_axis = np.array([0.0, 0.0, 1.0])
    for obs in obstacles:
        for c in centers:
            if isinstance(obs, SphereObstacle):
                v = obs.center - c
                axial = float(v @ z_axis)
                radial = float(np.linalg.norm(v - axial * z_axis))
                if radial <= r:
                    gap = abs(axial)
                else:
                    gap = math.hypot(axial, radial - r)
                if gap <= obs.radius:
                    return True
            elif isinstance(obs, PlaneObstacle):
                tilt = math.sqrt(max(0.0, 1.0 - float(obs.normal @ z_axis) ** 2))
                if obs.distance(c) - r * tilt <= 0.0:
                    return True
            else:
                az = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
                rim = c + r * np.column_stack([np.cos(az), np.sin(az), np.zeros(16)])
                probes = np.vstack([rim, c])
                if min(obs.distance(p) for p in probes) <= 0.0:
                    return True
    return False
