"""Closed-form ring kinematics: closure angle, FK/IK, calibration, scaling."""
import math

import numpy as np
import pytest

from ringguard.errors import DeploymentRangeError, RingDefinitionError
from ringguard.geometry import Pose
from ringguard.scissor import (
    DeploymentState,
    RingSpec,
    calibrate_ring,
    calibrate_segment_length,
    family_radius,
    forward_kinematics,
    inverse_kinematics,
    kink_angle_for_closure,
    theta_for_radius,
)


class TestClosureAngle:
    def test_sixteen_units(self):
        assert math.degrees(kink_angle_for_closure(16)) == pytest.approx(157.5, abs=1e-12)

    def test_four_units(self):
        assert math.degrees(kink_angle_for_closure(4)) == pytest.approx(90.0, abs=1e-12)

    def test_straight_rod_limit(self):
        # many units: the bend vanishes and the rod tends to a straight bar
        assert kink_angle_for_closure(10**6) == pytest.approx(math.pi, abs=1e-4)

    def test_rejects_small_rings(self):
        with pytest.raises(RingDefinitionError):
            kink_angle_for_closure(3)

    def test_spec_rejects_wrong_kink_angle(self):
        with pytest.raises(RingDefinitionError):
            RingSpec(unit_count=16, segment_length=0.1, kink_angle=math.radians(150.0))

    def test_spec_defaults_to_closure_angle(self):
        spec = RingSpec(unit_count=12, segment_length=0.1)
        assert spec.kink_angle == pytest.approx(kink_angle_for_closure(12), abs=1e-15)


class TestForwardKinematics:
    def test_max_radius_at_capped_opening(self):
        # calibrated 16-unit ring opened fully: 85 cm diameter target
        length = calibrate_segment_length(16, 0.425)
        spec = RingSpec(unit_count=16, segment_length=length)
        layout = forward_kinematics(spec, spec.theta_ceiling)
        assert layout.outer_radius == pytest.approx(0.425, abs=1e-12)
        # the nominal segment length quoted at mm precision behaves the same
        spec_mm = RingSpec(unit_count=16, segment_length=0.0829)
        top = forward_kinematics(spec_mm, spec_mm.theta_ceiling).outer_radius
        assert top == pytest.approx(0.425, abs=1e-3)

    def test_supremum_formula(self):
        spec = RingSpec(unit_count=16, segment_length=0.0829)
        assert spec.max_outer_radius == pytest.approx(0.0829 / math.sin(math.pi / 16), rel=1e-12)
        # capped ceiling stays strictly below the supremum
        a_top = forward_kinematics(spec, spec.theta_ceiling).outer_radius
        assert a_top < spec.max_outer_radius

    def test_radii_scale_linearly_with_segment_length(self):
        theta = 2.0
        s1 = RingSpec(unit_count=16, segment_length=0.1)
        s2 = RingSpec(unit_count=16, segment_length=0.2)
        l1 = forward_kinematics(s1, theta)
        l2 = forward_kinematics(s2, theta)
        for name in ("outer_radius", "pivot_radius", "inner_radius"):
            assert getattr(l2, name) == pytest.approx(2.0 * getattr(l1, name), rel=1e-12)
        assert np.allclose(l2.outer_joints, 2.0 * l1.outer_joints, atol=1e-15)

    def test_collapsed_diameter_reachable(self):
        spec, dep = calibrate_ring()
        theta = theta_for_radius(spec, 0.26)
        assert dep.theta_min <= theta <= dep.theta_max
        assert family_radius(spec, theta) == pytest.approx(0.26, abs=1e-12)

    def test_out_of_range_theta_rejected(self):
        spec = RingSpec(unit_count=16, segment_length=0.1)
        with pytest.raises(DeploymentRangeError):
            forward_kinematics(spec, spec.theta_floor - 0.05)
        with pytest.raises(DeploymentRangeError):
            forward_kinematics(spec, math.pi)  # flat singularity excluded

    def test_radii_independent_of_pose(self):
        pose = Pose.from_axes((0, 0, 1), (0, 1, 0), origin=(1.0, 2.0, 3.0))
        a = forward_kinematics(RingSpec(unit_count=16, segment_length=0.1), 2.0)
        b = forward_kinematics(
            RingSpec(unit_count=16, segment_length=0.1, hub_plane_pose=pose), 2.0
        )
        assert a.outer_radius == b.outer_radius
        assert np.allclose(a.outer_joints, b.outer_joints)


class TestRingInvariants:
    @pytest.mark.parametrize("unit_count", [5, 8, 16, 24])
    def test_closure_and_concentricity_across_band(self, unit_count):
        spec = RingSpec(unit_count=unit_count, segment_length=0.1)
        thetas = np.linspace(spec.theta_floor + 1e-6, spec.theta_ceiling, 1000)
        for theta in thetas:
            layout = forward_kinematics(spec, float(theta))
            assert abs(layout.subtended_angle_sum() - 2 * math.pi) < 1e-9
            for joints, radius in (
                (layout.outer_joints, layout.outer_radius),
                (layout.pivot_joints, layout.pivot_radius),
                (layout.inner_joints, layout.inner_radius),
            ):
                fit = np.linalg.norm(joints, axis=1) - radius
                assert np.max(np.abs(fit)) < 1e-9 * max(abs(radius), spec.segment_length)

    def test_adjacent_station_spacing(self):
        spec = RingSpec(unit_count=16, segment_length=0.1)
        layout = forward_kinematics(spec, 2.2)
        az = np.arctan2(layout.outer_joints[:, 1], layout.outer_joints[:, 0])
        gaps = np.diff(np.unwrap(az))
        assert np.allclose(gaps, 2 * math.pi / 16, atol=1e-12)

    def test_member_lengths_all_equal_segment_length(self):
        spec = RingSpec(unit_count=16, segment_length=0.0829)
        layout = forward_kinematics(spec, 2.5)
        segs = layout.member_segments()
        lengths = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
        assert np.max(np.abs(lengths - 0.0829)) < 1e-9 * 0.0829

    def test_outer_radius_strictly_monotone_in_theta(self):
        spec = RingSpec(unit_count=16, segment_length=0.1)
        thetas = np.linspace(spec.theta_floor, spec.theta_ceiling, 500)
        radii = [family_radius(spec, float(t)) for t in thetas]
        assert np.all(np.diff(radii) > 0)


class TestInverseKinematics:
    def test_round_trip(self):
        spec, dep = calibrate_ring()
        theta = inverse_kinematics(spec, 0.30, dep)
        assert family_radius(spec, theta) == pytest.approx(0.30, abs=1e-9)

    def test_expanded_target_hits_theta_max(self):
        spec, dep = calibrate_ring()
        theta = inverse_kinematics(spec, 0.425, dep)
        assert theta == pytest.approx(dep.theta_max, abs=1e-9)

    def test_out_of_band_target_reports_band(self):
        spec, dep = calibrate_ring()
        with pytest.raises(DeploymentRangeError) as err:
            inverse_kinematics(spec, 0.90, dep)
        lo, hi = err.value.band
        assert lo == pytest.approx(0.26, abs=1e-3)
        assert hi == pytest.approx(0.425, abs=1e-3)

    def test_random_round_trips(self):
        rng = np.random.default_rng(7)
        spec, dep = calibrate_ring()
        for _ in range(50):
            target = float(rng.uniform(0.26, 0.425))
            theta = inverse_kinematics(spec, target, dep)
            assert abs(family_radius(spec, theta) - target) < 1e-9


class TestCalibration:
    def test_sixteen_unit_lengths(self):
        assert calibrate_segment_length(16, 0.425) == pytest.approx(0.0829, abs=1e-4)
        assert calibrate_segment_length(16, 0.850) == pytest.approx(0.1658, abs=2e-4)
        # doubling the target doubles the arm
        assert calibrate_segment_length(16, 0.850) == pytest.approx(
            2 * calibrate_segment_length(16, 0.425), rel=1e-12
        )

    def test_eight_unit_length(self):
        assert calibrate_segment_length(8, 0.425) == pytest.approx(0.1627, abs=1e-4)

    def test_calibrated_band_spans_targets(self):
        spec, dep = calibrate_ring(16, 0.26, 0.425)
        assert family_radius(spec, dep.theta_min) == pytest.approx(0.26, abs=1e-9)
        assert family_radius(spec, dep.theta_max) == pytest.approx(0.425, abs=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(RingDefinitionError):
            calibrate_segment_length(16, -1.0)
        with pytest.raises(RingDefinitionError):
            calibrate_ring(16, 0.5, 0.4)


class TestDeploymentState:
    def test_ordering_enforced(self):
        with pytest.raises(DeploymentRangeError):
            DeploymentState(theta=2.0, theta_min=2.1, theta_max=3.0)

    def test_at_returns_new_state(self):
        dep = DeploymentState(theta=2.0, theta_min=1.5, theta_max=3.0)
        assert dep.at(2.5).theta == 2.5
        assert dep.theta == 2.0
