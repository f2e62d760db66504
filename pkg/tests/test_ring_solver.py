"""Free-joint constraint solver as the independent oracle for the closed form."""
import math
import time

import numpy as np
import pytest

from ringguard.ring_solver import (
    closure_residual,
    rod_chord_length,
    solve_from_perturbed_layout,
)
from ringguard.scissor import RingSpec, kink_angle_for_closure


def test_chord_encodes_kink_angle():
    # right-angle bend: chord is the hypotenuse of two unit arms
    assert rod_chord_length(1.0, math.pi / 2) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    # straight rod: chord is both arms end to end
    assert rod_chord_length(0.5, math.pi) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("unit_count", [4, 8, 16])
def test_closure_only_at_the_closure_angle(unit_count):
    """The constraint system is satisfiable across the deployment sweep only
    at the closure kink angle; nearby angles leave a residual floor."""
    rng = np.random.default_rng(11)
    gamma = kink_angle_for_closure(unit_count)
    thetas = np.linspace(0.9, 3.0, 7)
    for theta in thetas:
        good = closure_residual(unit_count, 0.1, gamma, float(theta), rng)
        assert good < 1e-9
    for offset in (0.01, -0.01, 0.1):
        floors = [
            closure_residual(unit_count, 0.1, gamma + offset, float(t), rng)
            for t in thetas
        ]
        assert min(floors) > 1e-6


def test_closed_form_matches_solver_on_random_rings():
    """Oracle equivalence: >=100 random (N, l, theta) samples agree < 1e-9."""
    rng = np.random.default_rng(2024)
    started = time.monotonic()
    worst_pos = 0.0
    worst_res = 0.0
    for _ in range(110):
        n = int(rng.integers(5, 41))
        length = float(rng.uniform(0.02, 0.5))
        spec = RingSpec(unit_count=n, segment_length=length)
        lo, hi = spec.theta_floor, spec.theta_ceiling
        theta = float(rng.uniform(lo + 0.005 * (hi - lo), hi))
        sol, pos_err = solve_from_perturbed_layout(spec, theta, rng)
        worst_pos = max(worst_pos, pos_err)
        worst_res = max(worst_res, sol.constraint_residual)
    elapsed = time.monotonic() - started
    assert worst_pos < 1e-9
    assert worst_res < 1e-9
    assert elapsed < 10.0
