"""Guard configurations assembled from rings: mass, parts, coverage, clearance.

Four geometries share one actuated ring mechanism:

- circle: one ring in the rotor plane's parallel plane above the hub
- cylinder: two parallel rings
- hemisphere: one full ring plus two half rings arched over the top
- sphere: three mutually perpendicular full rings

All rings in a guard share the same deployment angle (one actuator, one
degree of freedom); half rings are slaved arcs of the same mechanism.

Piece counting follows the printed-kit convention: every scissor unit is two
rod pieces whose pivot and end pins are press-fit features of the rods, the
four rack ends are dedicated actuator joints, and separate regular joint
pieces exist only where rings meet (one coupler per half-ring pole
attachment, a two-part clamp where two arcs cross, one strut per rack azimuth
tying a cylinder's rings). A 16-unit hemisphere is then 64 rods + 6 regular
joints + 4 actuator joints = 74 pieces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import RingDefinitionError
from .geometry import Pose, point_to_circle_distance
from .scissor import DeploymentState, RingSpec, forward_kinematics

# Safe distance between the propeller envelope and the guard members.
MIN_PROP_GAP = 0.15


class GuardKind(str, Enum):
    CIRCLE = "circle"
    CYLINDER = "cylinder"
    HEMISPHERE = "hemisphere"
    SPHERE = "sphere"


MASS_MULTIPLE = {
    GuardKind.CIRCLE: 1,
    GuardKind.CYLINDER: 2,
    GuardKind.HEMISPHERE: 2,
    GuardKind.SPHERE: 3,
}

# Separate regular-joint pieces needed to tie rings together.
_COUPLER_COUNT = {
    GuardKind.CIRCLE: 0,
    GuardKind.CYLINDER: 4,   # one strut per rack azimuth
    GuardKind.HEMISPHERE: 6,  # 4 pole couplers + 2-part zenith clamp
    GuardKind.SPHERE: 12,     # 3 ring pairs x 2 crossings x 2 clamp parts
}

ACTUATOR_JOINT_COUNT = 4


@dataclass(frozen=True)
class RingPlacement:
    """One ring (or arc) of the guard: its pose in the body frame and extent."""

    pose: Pose
    unit_span: int  # units realized; N for a full ring, N/2 for a half ring

    def is_arc(self, unit_count: int) -> bool:
        return self.unit_span < unit_count


@dataclass(frozen=True)
class BillOfMaterials:
    rod_count: int
    regular_joint_count: int
    actuator_joint_count: int

    @property
    def total_pieces(self) -> int:
        return self.rod_count + self.regular_joint_count + self.actuator_joint_count


@dataclass(frozen=True)
class CoverageVolume:
    """Snapshot of the guard's occupied space at one deployment angle."""

    member_segments: np.ndarray  # (M, 2, 3) body-frame endpoints
    member_ring_index: np.ndarray  # (M,) placement index per segment
    bounding_center: np.ndarray  # (3,) hub center in the body frame
    bounding_radius: float  # reaches every member point plus the tube radius
    swept_solid: dict  # union of toroidal tubes around the ring circles


@dataclass(frozen=True)
class ClearanceReport:
    min_gap: float
    passed: bool
    required_gap: float = MIN_PROP_GAP


@dataclass(frozen=True)
class GuardConfiguration:
    """An assembled guard: rings with poses, masses, and the shared DOF band.

    Immutable; the current deployment angle is supplied per query so that
    concurrent readers can probe different angles safely.
    """

    kind: GuardKind
    ring_spec: RingSpec
    deployment: DeploymentState
    placements: tuple[RingPlacement, ...]
    ring_mass: float = 0.2
    actuator_mass: float = 1.0
    tube_radius: float = 0.01
    hub_offset: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.13]))
    ring_separation: float = 0.25

    @property
    def structure_mass(self) -> float:
        return MASS_MULTIPLE[self.kind] * self.ring_mass

    @property
    def total_mass(self) -> float:
        return self.structure_mass + self.actuator_mass

    @property
    def rack_azimuths(self) -> np.ndarray:
        """Rack directions in the driven ring plane, 90 degrees apart."""
        return np.array([0.0, 0.5, 1.0, 1.5]) * math.pi

    def outer_radius(self, theta: float) -> float:
        return forward_kinematics(self.ring_spec, theta).outer_radius


def assemble(
    kind: GuardKind | str,
    ring_spec: RingSpec,
    deployment: DeploymentState,
    ring_mass: float = 0.2,
    actuator_mass: float = 1.0,
    tube_radius: float = 0.01,
    hub_offset=(0.0, 0.0, 0.13),
    ring_separation: float = 0.25,
) -> GuardConfiguration:
    """Build one of the four guard configurations around a ring spec."""
    kind = GuardKind(kind)
    n = ring_spec.unit_count
    if n % 4 != 0:
        raise RingDefinitionError(
            f"actuated guards need a unit count divisible by 4 (rack symmetry), got {n}"
        )
    hub = np.asarray(hub_offset, dtype=float)
    x, y, z = np.eye(3)

    flat = Pose.from_axes(x, y, hub)
    upright_x = Pose.from_axes(x, z, hub)  # arc from +x over the zenith to -x
    upright_y = Pose.from_axes(y, z, hub)

    if kind is GuardKind.CIRCLE:
        placements = (RingPlacement(flat, n),)
    elif kind is GuardKind.CYLINDER:
        half_gap = 0.5 * ring_separation
        placements = (
            RingPlacement(Pose.from_axes(x, y, hub + z * half_gap), n),
            RingPlacement(Pose.from_axes(x, y, hub - z * half_gap), n),
        )
    elif kind is GuardKind.HEMISPHERE:
        placements = (
            RingPlacement(flat, n),
            RingPlacement(upright_x, n // 2),
            RingPlacement(upright_y, n // 2),
        )
    else:  # sphere
        placements = (
            RingPlacement(flat, n),
            RingPlacement(upright_x, n),
            RingPlacement(upright_y, n),
        )
    return GuardConfiguration(
        kind=kind,
        ring_spec=ring_spec,
        deployment=deployment,
        placements=placements,
        ring_mass=ring_mass,
        actuator_mass=actuator_mass,
        tube_radius=tube_radius,
        hub_offset=hub,
        ring_separation=ring_separation,
    )


def bill_of_materials(kind: GuardKind | str, unit_count: int) -> BillOfMaterials:
    """Piece counts under the press-fit printed-kit convention (module docstring)."""
    kind = GuardKind(kind)
    if unit_count < 4:
        raise RingDefinitionError(f"ring needs at least 4 scissor units, got {unit_count}")
    if kind is GuardKind.HEMISPHERE and unit_count % 2 != 0:
        raise RingDefinitionError(
            f"half rings need an even unit count, got {unit_count}"
        )
    units = {
        GuardKind.CIRCLE: unit_count,
        GuardKind.CYLINDER: 2 * unit_count,
        GuardKind.HEMISPHERE: unit_count + 2 * (unit_count // 2),
        GuardKind.SPHERE: 3 * unit_count,
    }[kind]
    return BillOfMaterials(
        rod_count=2 * units,
        regular_joint_count=_COUPLER_COUNT[kind],
        actuator_joint_count=ACTUATOR_JOINT_COUNT,
    )


def coverage_volume(guard: GuardConfiguration, theta: float) -> CoverageVolume:
    """Member segments and bounding geometry for collision queries.

    Contacts are resolved against member centerlines; the tube radius only
    pads the bounding sphere and describes the swept solid.
    """
    layout = forward_kinematics(guard.ring_spec, theta)
    segments = []
    ring_index = []
    tubes = []
    reach = 0.0
    for idx, placement in enumerate(guard.placements):
        segs2d = layout.member_segments(placement.unit_span)
        flat = segs2d.reshape(-1, 2)
        placed = placement.pose.transform_planar(flat).reshape(-1, 2, 3)
        segments.append(placed)
        ring_index.append(np.full(len(placed), idx))
        endpoint_reach = np.linalg.norm(
            placed.reshape(-1, 3) - guard.hub_offset, axis=1
        ).max()
        reach = max(reach, float(endpoint_reach))
        tubes.append(
            {
                "center": placement.pose.translation.tolist(),
                "normal": placement.pose.normal.tolist(),
                "radius": layout.outer_radius,
                "tube_radius": guard.tube_radius,
                "arc_span_rad": (
                    None
                    if not placement.is_arc(guard.ring_spec.unit_count)
                    else [0.0, math.pi]
                ),
            }
        )
    return CoverageVolume(
        member_segments=np.concatenate(segments, axis=0),
        member_ring_index=np.concatenate(ring_index, axis=0),
        bounding_center=guard.hub_offset.copy(),
        bounding_radius=reach + guard.tube_radius,
        swept_solid={"type": "torus_union", "tubes": tubes},
    )


def _probe_points(drone_geometry, samples: int) -> np.ndarray:
    """Boundary points of the propeller tip circle, in the body frame (z=0)."""
    tip_radius = drone_geometry.overall_span / 2.0
    az = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    return np.column_stack([tip_radius * np.cos(az), tip_radius * np.sin(az), np.zeros(samples)])


def clearance_check(
    guard: GuardConfiguration,
    theta: float,
    drone_geometry,
    samples: int = 720,
) -> ClearanceReport:
    """Gap between the propeller tip circle and the guard's ring circles.

    ``drone_geometry`` needs an ``overall_span`` attribute (propeller
    tip-to-tip length); rings are idealized as their outer-joint circles,
    which bound the outermost member material.
    """
    layout = forward_kinematics(guard.ring_spec, theta)
    probes = _probe_points(drone_geometry, samples)
    min_gap = math.inf
    for placement in guard.placements:
        arc = None
        u_axis = None
        if placement.is_arc(guard.ring_spec.unit_count):
            arc = (0.0, math.pi)
            u_axis = placement.pose.rotation[:, 0]
        dists = point_to_circle_distance(
            probes,
            placement.pose.translation,
            placement.pose.normal,
            layout.outer_radius,
            arc=arc,
            u_axis=u_axis,
        )
        min_gap = min(min_gap, float(np.min(dists)))
    return ClearanceReport(min_gap=min_gap, passed=min_gap >= MIN_PROP_GAP)
