"""Free-joint constraint solver for closed scissor rings.

This is the independent check on the closed-form layout. The unknowns are
all 3N joint positions in the ring plane; the only physics is rod rigidity,
expressed as squared-distance constraints. Each bent rod is a rigid triangle
over its two end joints and its pivot: two arm lengths l plus the end-to-end
chord, which encodes the kink angle via

    chord^2 = 2 l^2 (1 - cos(kink_angle))

Nothing here assumes joints lie on circles, so a small constraint residual at
many deployment angles is genuine evidence that the kink angle admits a
one-parameter family; at other kink angles the system is over-determined and
the residual stays bounded away from zero.

Gauge freedoms (two translations, one rotation, one deployment) are pinned by
extra rows: outer-joint centroid at the origin, first outer joint on the +x
axis, and the chord between the first two outer joints set to 2 l sin(theta/2)
-- which is the definition of the opening angle, not a radius formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .scissor import JointLayout, RingSpec, forward_kinematics


def rod_chord_length(segment_length: float, kink_angle: float) -> float:
    """End-to-end distance of a rigid bent rod with two arms of equal length."""
    return segment_length * math.sqrt(2.0 * (1.0 - math.cos(kink_angle)))


@dataclass
class RingSolution:
    outer: np.ndarray  # (N, 2)
    pivot: np.ndarray  # (N, 2)
    inner: np.ndarray  # (N, 2)
    constraint_residual: float  # max |member length - target| over all rods [m]
    cost: float
    success: bool


def _constraint_pairs(unit_count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index pairs (into the 3N joint table) and a chord mask per constraint.

    Joint table layout: outer joints 0..N-1, pivots N..2N-1, inner 2N..3N-1.
    """
    n = unit_count
    rows_i, rows_j, is_chord = [], [], []
    for i in range(n):
        j = (i + 1) % n
        o_i, k_i, o_j = i, n + i, j
        in_i, in_j = 2 * n + i, 2 * n + j
        # rod A: outer_i -- pivot_i -- inner_{i+1}
        rows_i += [o_i, k_i, o_i]
        rows_j += [k_i, in_j, in_j]
        is_chord += [False, False, True]
        # rod B: inner_i -- pivot_i -- outer_{i+1}
        rows_i += [in_i, k_i, in_i]
        rows_j += [k_i, o_j, o_j]
        is_chord += [False, False, True]
    return np.asarray(rows_i), np.asarray(rows_j), np.asarray(is_chord)


def solve_ring(
    unit_count: int,
    segment_length: float,
    kink_angle: float,
    theta_pin: float,
    start_positions: np.ndarray,
    max_nfev: int = 400,
) -> RingSolution:
    """Least-squares solve of the pin-joint constraint system.

    ``start_positions`` is a (3N, 2) joint table (outer, pivot, inner blocks).
    ``theta_pin`` fixes the deployment gauge through the first outer chord.
    """
    n = unit_count
    l = segment_length
    ri, rj, chord_mask = _constraint_pairs(n)
    targets = np.where(chord_mask, rod_chord_length(l, kink_angle), l) ** 2
    scale = l * l
    chord_pin_sq = (2.0 * l * math.sin(theta_pin / 2.0)) ** 2

    def unpack(x: np.ndarray) -> np.ndarray:
        return x.reshape(3 * n, 2)

    def residuals(x: np.ndarray) -> np.ndarray:
        p = unpack(x)
        d = p[ri] - p[rj]
        dist_res = (np.einsum("ij,ij->i", d, d) - targets) / scale
        outer = p[:n]
        centroid = outer.mean(axis=0)
        first_chord = outer[0] - outer[1]
        gauge = np.array(
            [
                centroid[0] / l,
                centroid[1] / l,
                outer[0, 1] / l,
                (float(first_chord @ first_chord) - chord_pin_sq) / scale,
            ]
        )
        return np.concatenate([dist_res, gauge])

    def jacobian(x: np.ndarray) -> np.ndarray:
        p = unpack(x)
        m = len(ri)
        jac = np.zeros((m + 4, 3 * n * 2))
        d = 2.0 * (p[ri] - p[rj]) / scale
        rows = np.arange(m)
        for axis in range(2):
            jac[rows, ri * 2 + axis] += d[:, axis]
            jac[rows, rj * 2 + axis] -= d[:, axis]
        # centroid rows
        jac[m, 0 : 2 * n : 2] = 1.0 / (n * l)
        jac[m + 1, 1 : 2 * n : 2] = 1.0 / (n * l)
        # first outer joint on +x axis
        jac[m + 2, 1] = 1.0 / l
        # deployment pin chord
        fc = 2.0 * (p[0] - p[1]) / scale
        jac[m + 3, 0:2] = fc
        jac[m + 3, 2:4] = -fc
        return jac

    result = least_squares(
        residuals,
        np.asarray(start_positions, dtype=float).ravel(),
        jac=jacobian,
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=max_nfev,
    )
    p = unpack(result.x)
    d = np.linalg.norm(p[ri] - p[rj], axis=1)
    residual = float(np.max(np.abs(d - np.sqrt(targets))))
    return RingSolution(
        outer=p[:n].copy(),
        pivot=p[n : 2 * n].copy(),
        inner=p[2 * n :].copy(),
        constraint_residual=residual,
        cost=float(result.cost),
        success=bool(result.success),
    )


def layout_as_joint_table(layout: JointLayout) -> np.ndarray:
    """Stack a closed-form layout into the solver's (3N, 2) joint table."""
    return np.vstack([layout.outer_joints, layout.pivot_joints, layout.inner_joints])


def raw_joint_table(unit_count: int, segment_length: float, theta: float) -> np.ndarray:
    """Closure-condition joint table without the physical feasibility gate.

    Same radius formulas as the closed form, but negative inner radii are
    allowed (inner joints folded past the hub center). The distance
    constraints hold regardless of sign, which lets the oracle probe rings
    (e.g. 4 units) whose family is real but not physically deployable.
    """
    n = unit_count
    psi = math.pi / n
    l = segment_length
    radii = [l * math.sin(theta / 2.0 - k * psi) / math.sin(psi) for k in range(3)]
    station_az = 2.0 * psi * np.arange(n)
    pivot_az = station_az + psi
    stations = np.column_stack([np.cos(station_az), np.sin(station_az)])
    pivots = np.column_stack([np.cos(pivot_az), np.sin(pivot_az)])
    return np.vstack([radii[0] * stations, radii[1] * pivots, radii[2] * stations])


def solve_from_perturbed_layout(
    spec: RingSpec,
    theta: float,
    rng: np.random.Generator,
    perturbation: float = 0.01,
) -> tuple[RingSolution, float]:
    """Solve from a randomly perturbed closed-form start.

    Returns the solution and the max position error against the closed form,
    the quantity the oracle-equivalence check bounds.
    """
    layout = forward_kinematics(spec, theta)
    table = layout_as_joint_table(layout)
    start = table + rng.normal(0.0, perturbation * spec.segment_length, table.shape)
    sol = solve_ring(
        spec.unit_count, spec.segment_length, spec.kink_angle, theta, start
    )
    solved = np.vstack([sol.outer, sol.pivot, sol.inner])
    return sol, float(np.max(np.linalg.norm(solved - table, axis=1)))


def closure_residual(
    unit_count: int,
    segment_length: float,
    kink_angle: float,
    theta: float,
    rng: np.random.Generator,
    perturbation: float = 0.002,
) -> float:
    """Best-achievable constraint residual for an arbitrary kink angle.

    The start point is the closure-condition layout at the same theta, so for
    the correct kink angle this converges to ~machine precision while wrong
    kink angles leave a solid residual floor.
    """
    table = raw_joint_table(unit_count, segment_length, theta)
    start = table + rng.normal(0.0, perturbation * segment_length, table.shape)
    sol = solve_ring(unit_count, segment_length, kink_angle, theta, start)
    return sol.constraint_residual
