"""Small geometry helpers: rigid poses and point/segment/circle distances.

Everything is in meters and radians. Points are numpy arrays; functions are
vectorized over the first axis where it matters for the simulation loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("zero-length vector has no direction")
    return v / n


@dataclass(frozen=True)
class Pose:
    """Rigid transform mapping local coordinates into a parent frame.

    ``rotation`` columns are the local x/y/z axes expressed in the parent
    frame. Planar points (x, y) are lifted to (x, y, 0) before transforming,
    which is how ring layouts get placed into the body frame.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_axes(cls, x_axis, y_axis, origin=(0.0, 0.0, 0.0)) -> "Pose":
        x = _unit(np.asarray(x_axis, dtype=float))
        y = np.asarray(y_axis, dtype=float)
        y = _unit(y - x * float(np.dot(y, x)))
        z = np.cross(x, y)
        rot = np.column_stack([x, y, z])
        return cls(rot, np.asarray(origin, dtype=float))

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.rotation.T + self.translation

    def transform_planar(self, points_2d: np.ndarray) -> np.ndarray:
        """Lift (n, 2) ring-plane points into the parent frame as (n, 3)."""
        pts = np.atleast_2d(np.asarray(points_2d, dtype=float))
        lifted = np.zeros((pts.shape[0], 3))
        lifted[:, :2] = pts
        return lifted @ self.rotation.T + self.translation

    @property
    def normal(self) -> np.ndarray:
        """Plane normal of the local xy-plane, in the parent frame."""
        return self.rotation[:, 2]


def point_to_circle_distance(
    points: np.ndarray,
    center: np.ndarray,
    normal: np.ndarray,
    radius: float,
    arc: tuple[float, float] | None = None,
    u_axis: np.ndarray | None = None,
) -> np.ndarray:
    """Distance from points to a circle (or circular arc) in 3D.

    The closest circle point to p has azimuth equal to p's projection into
    the circle plane; with ``arc=(lo, hi)`` the azimuth (measured from
    ``u_axis``) is clamped to the arc before measuring.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = _unit(np.asarray(normal, dtype=float))
    v = pts - np.asarray(center, dtype=float)
    axial = v @ n
    in_plane = v - np.outer(axial, n)
    if arc is None:
        radial = np.linalg.norm(in_plane, axis=1)
        return np.hypot(axial, radial - radius)
    if u_axis is None:
        raise ValueError("arc distances need a reference u_axis")
    u = _unit(np.asarray(u_axis, dtype=float))
    w = np.cross(n, u)
    az = np.arctan2(in_plane @ w, in_plane @ u)
    az = np.clip(az, arc[0], arc[1])
    closest = (
        np.asarray(center, dtype=float)
        + radius * (np.cos(az)[:, None] * u + np.sin(az)[:, None] * w)
    )
    return np.linalg.norm(pts - closest, axis=1)


def closest_point_on_segments(point: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray):
    """Closest points on (n) segments to one query point.

    Returns (points (n, d), distances (n,)).
    """
    p = np.asarray(point, dtype=float)
    a = np.atleast_2d(np.asarray(seg_a, dtype=float))
    b = np.atleast_2d(np.asarray(seg_b, dtype=float))
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom == 0.0, 1.0, denom)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return closest, np.linalg.norm(closest - p, axis=1)


def segments_to_point_distance(point, seg_a, seg_b) -> float:
    """Minimum distance from a point to a set of segments."""
    _, d = closest_point_on_segments(point, seg_a, seg_b)
    return float(np.min(d))


def closest_points_segments_to_sphere(center, seg_a, seg_b):
    """Per-segment closest point to a sphere center (same as point query)."""
    return closest_point_on_segments(center, seg_a, seg_b)
