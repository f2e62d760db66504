"""Planar kinematics of a closed ring of angulated scissor units.

A ring is built from N identical units. Each unit is a pair of bent rods
pivoted together at their kinks; adjacent units share pin joints at the rod
ends. Writing psi = pi/N, a ring of bent rods closes into a mechanism with a
single radial degree of freedom exactly when the interior kink angle is

    gamma = pi - 2*psi

With that kink angle the three joint families stay on concentric circles at
every deployment angle theta (the opening angle at a pivot, between the two
arms that rise to the outer connection joints):

    outer radius  a(theta) = l * sin(theta/2)           / sin(psi)
    pivot radius  rho      = l * sin(theta/2 - psi)     / sin(psi)
    inner radius  b        = l * sin(theta/2 - 2*psi)   / sin(psi)

where l is the arm length (each half of a bent rod). These follow from the
isosceles triangles formed by each pivot and its two neighbouring connection
joints; the chord between adjacent outer joints is 2*l*sin(theta/2) and
adjacent joints are always 2*psi apart in azimuth. All radii grow strictly
with theta. The inner joints reach the hub center at theta = 4*psi, and the
scissors flatten out (mechanism singularity, zero radial mobility) at
theta = pi, so the feasible band is [4*psi, pi - margin].

The closed forms here are independently checked by the free-joint constraint
solver in :mod:`ringguard.ring_solver`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DeploymentRangeError, RingDefinitionError
from .geometry import Pose

# Degrees of margin kept between theta_max and the flat singularity, where the
# radius Jacobian vanishes and actuator coupling would blow up.
SINGULARITY_MARGIN = math.radians(1.0)

# Absolute tolerance for geometric residuals; far below fabrication scale.
GEOM_TOL = 1e-9

JOINT_FAMILIES = ("outer", "pivot", "inner")
_FAMILY_STEP = {"outer": 0, "pivot": 1, "inner": 2}


def kink_angle_for_closure(unit_count: int) -> float:
    """Interior kink angle (rad) for which ``unit_count`` units close into a ring.

    Only at this angle does the closed chain admit a one-parameter radial
    deployment with every joint family on a concentric circle.
    """
    if int(unit_count) != unit_count or unit_count < 4:
        raise RingDefinitionError(
            f"ring needs at least 4 scissor units, got {unit_count}"
        )
    return math.pi - 2.0 * math.pi / unit_count


def calibrate_segment_length(unit_count: int, max_outer_radius: float) -> float:
    """Arm length l such that the ring opened to theta_max hits ``max_outer_radius``.

    theta_max sits SINGULARITY_MARGIN below the flat singularity, so
    l = R * sin(pi/N) / cos(margin/2); the cosine factor is ~4e-5 above the
    ideal (singular) closed form R * sin(pi/N).
    """
    if unit_count < 4:
        raise RingDefinitionError(f"ring needs at least 4 scissor units, got {unit_count}")
    if max_outer_radius <= 0:
        raise RingDefinitionError("target radius must be positive")
    return max_outer_radius * math.sin(math.pi / unit_count) / math.cos(SINGULARITY_MARGIN / 2.0)


@dataclass(frozen=True)
class RingSpec:
    """Parametric definition of one scissor ring.

    ``kink_angle`` may be omitted (it is then set from the closure condition)
    but if given it must match the closure value; anything else cannot deploy
    radially and is rejected.
    """

    unit_count: int = 16
    segment_length: float = calibrate_segment_length(16, 0.425)
    kink_angle: float | None = None
    hub_plane_pose: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        closure = kink_angle_for_closure(self.unit_count)
        if self.segment_length <= 0:
            raise RingDefinitionError("segment_length must be positive")
        if self.kink_angle is None:
            object.__setattr__(self, "kink_angle", closure)
        elif abs(self.kink_angle - closure) > GEOM_TOL:
            raise RingDefinitionError(
                f"kink angle {self.kink_angle:.12f} rad cannot close a "
                f"{self.unit_count}-unit ring; closure needs {closure:.12f} rad"
            )

    @property
    def half_step(self) -> float:
        """psi = pi/N, half the azimuthal spacing of adjacent stations."""
        return math.pi / self.unit_count

    @property
    def theta_floor(self) -> float:
        """Smallest feasible opening angle (inner joints at the hub center)."""
        return 4.0 * self.half_step

    @property
    def theta_ceiling(self) -> float:
        """Largest allowed opening angle (margin below the flat singularity)."""
        return math.pi - SINGULARITY_MARGIN

    @property
    def max_outer_radius(self) -> float:
        """Supremum of the outer radius, l/sin(pi/N), reached only at the singularity."""
        return self.segment_length / math.sin(self.half_step)


@dataclass(frozen=True)
class DeploymentState:
    """The single degree of freedom of a guard and its operating band."""

    theta: float
    theta_min: float
    theta_max: float

    def __post_init__(self):
        if not (self.theta_min <= self.theta <= self.theta_max):
            raise DeploymentRangeError(
                f"theta {self.theta:.6f} outside operating band",
                band=(self.theta_min, self.theta_max),
            )

    def at(self, theta: float) -> "DeploymentState":
        return DeploymentState(theta, self.theta_min, self.theta_max)


def family_radius(spec: RingSpec, theta: float, family: str = "outer") -> float:
    """Radius of one joint family at deployment angle theta (no range check)."""
    k = _FAMILY_STEP[family]
    psi = spec.half_step
    return spec.segment_length * math.sin(theta / 2.0 - k * psi) / math.sin(psi)


def _check_theta(spec: RingSpec, theta: float) -> None:
    lo, hi = spec.theta_floor, spec.theta_ceiling
    if lo > hi:
        raise DeploymentRangeError(
            f"a {spec.unit_count}-unit ring has no feasible deployment band",
            band=(lo, hi),
        )
    if not (lo - 1e-12 <= theta <= hi + 1e-12):
        raise DeploymentRangeError(
            f"theta {theta:.6f} rad outside feasible band [{lo:.6f}, {hi:.6f}]",
            band=(lo, hi),
        )


@dataclass(frozen=True)
class JointLayout:
    """All joint positions of a ring at one deployment angle, in the ring plane."""

    spec: RingSpec
    theta: float
    outer_radius: float
    pivot_radius: float
    inner_radius: float
    outer_joints: np.ndarray  # (N, 2)
    pivot_joints: np.ndarray  # (N, 2)
    inner_joints: np.ndarray  # (N, 2)

    def member_segments(self, unit_span: int | None = None) -> np.ndarray:
        """Rod segments as an (M, 2, 2) array of 2D endpoints.

        Unit i contributes four segments: O_i-K_i, K_i-I_{i+1}, I_i-K_i and
        K_i-O_{i+1}. ``unit_span`` < N yields the leading arc (used for half
        rings); indices wrap for the full ring.
        """
        n = self.spec.unit_count
        span = n if unit_span is None else unit_span
        segs = []
        for i in range(span):
            j = (i + 1) % n
            o_i, k_i = self.outer_joints[i], self.pivot_joints[i]
            o_j = self.outer_joints[j]
            i_i, i_j = self.inner_joints[i], self.inner_joints[j]
            segs.append([o_i, k_i])
            segs.append([k_i, i_j])
            segs.append([i_i, k_i])
            segs.append([k_i, o_j])
        return np.asarray(segs)

    def subtended_angle_sum(self) -> float:
        """Sum of per-unit angles subtended at the center by the outer joints.

        Closure demands exactly 2*pi for a full ring.
        """
        pts = self.outer_joints
        total = 0.0
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            cross = a[0] * b[1] - a[1] * b[0]
            dot = float(np.dot(a, b))
            total += math.atan2(cross, dot)
        return total


def forward_kinematics(spec: RingSpec, theta: float) -> JointLayout:
    """Joint circle radii and positions at deployment angle theta.

    Raises DeploymentRangeError if theta is outside the feasible band
    (inner joints through the hub, or past the flat singularity).
    """
    _check_theta(spec, theta)
    n = spec.unit_count
    psi = spec.half_step
    a = family_radius(spec, theta, "outer")
    rho = family_radius(spec, theta, "pivot")
    b = family_radius(spec, theta, "inner")
    station_az = 2.0 * psi * np.arange(n)
    pivot_az = station_az + psi
    stations = np.column_stack([np.cos(station_az), np.sin(station_az)])
    pivots = np.column_stack([np.cos(pivot_az), np.sin(pivot_az)])
    return JointLayout(
        spec=spec,
        theta=theta,
        outer_radius=a,
        pivot_radius=rho,
        inner_radius=b,
        outer_joints=a * stations,
        pivot_joints=rho * pivots,
        inner_joints=b * stations,
    )


def theta_for_radius(
    spec: RingSpec,
    target_radius: float,
    family: str = "outer",
    bounds: tuple[float, float] | None = None,
) -> float:
    """Invert the monotone radius map by bisection.

    ``bounds`` restricts the search to an operating band (defaults to the
    full feasible band). The returned theta reproduces the target radius to
    well under GEOM_TOL.
    """
    lo, hi = bounds if bounds is not None else (spec.theta_floor, spec.theta_ceiling)
    if lo > hi:
        raise DeploymentRangeError("empty deployment band", band=(lo, hi))
    r_lo = family_radius(spec, lo, family)
    r_hi = family_radius(spec, hi, family)
    if not (r_lo - GEOM_TOL <= target_radius <= r_hi + GEOM_TOL):
        raise DeploymentRangeError(
            f"target {family} radius {target_radius:.6f} m outside achievable "
            f"band [{r_lo:.6f}, {r_hi:.6f}] m",
            band=(r_lo, r_hi),
        )
    # Monotone increasing on the operating branch: plain bisection.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if family_radius(spec, mid, family) < target_radius:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def inverse_kinematics(
    spec: RingSpec,
    target_outer_radius: float,
    deployment: DeploymentState | None = None,
) -> float:
    """Deployment angle whose outer radius matches the target.

    With a DeploymentState the search (and the error band in the raised
    DeploymentRangeError) is limited to the operating range.
    """
    bounds = None
    if deployment is not None:
        bounds = (deployment.theta_min, deployment.theta_max)
    return theta_for_radius(spec, target_outer_radius, "outer", bounds)


def calibrate_ring(
    unit_count: int = 16,
    collapsed_outer_radius: float = 0.26,
    expanded_outer_radius: float = 0.425,
    hub_plane_pose: Pose | None = None,
) -> tuple[RingSpec, DeploymentState]:
    """Build a ring whose operating band spans the two target radii.

    The arm length is chosen so theta_max (the capped maximum opening) hits
    the expanded radius exactly; theta_min is then solved for the collapsed
    radius. Returns the spec and the deployment band parked at theta_min.
    """
    if not 0 < collapsed_outer_radius < expanded_outer_radius:
        raise RingDefinitionError(
            "need 0 < collapsed radius < expanded radius, got "
            f"{collapsed_outer_radius} and {expanded_outer_radius}"
        )
    length = calibrate_segment_length(unit_count, expanded_outer_radius)
    spec = RingSpec(
        unit_count=unit_count,
        segment_length=length,
        hub_plane_pose=hub_plane_pose if hub_plane_pose is not None else Pose.identity(),
    )
    theta_max = spec.theta_ceiling
    theta_min = theta_for_radius(spec, collapsed_outer_radius, "outer")
    if theta_min < spec.theta_floor:
        raise RingDefinitionError(
            f"collapsed radius {collapsed_outer_radius} m needs theta below the "
            "feasible floor; use fewer units or a larger collapsed target"
        )
    return spec, DeploymentState(theta=theta_min, theta_min=theta_min, theta_max=theta_max)
