"""Flight model: dynamics integration, PID behavior, trajectory following."""
import math

import numpy as np
import pytest

from ringguard.flight import (
    THRUST_LOSS,
    DroneParams,
    DroneState,
    MocapSample,
    MotionCaptureSim,
    PidGains,
    PositionController,
    Trajectory,
    TrajectoryFollower,
    payload_feasibility,
    pid_update,
    step_dynamics,
)

DT = 1e-3
CONTROL_DT = 1 / 200.0


def hover_state(params, mass, z=1.0):
    return DroneState(
        position=np.array([0.0, 0.0, z]),
        thrust_vector=np.array([0.0, 0.0, mass * params.gravity]),
    )


def closed_loop(params, gains, mass, target, duration, start=None, noise=0.0, seed=0):
    """1 kHz physics with 200 Hz control; returns sampled positions."""
    state = start if start is not None else hover_state(params, mass)
    ctl = PositionController(gains, params)
    mocap = MotionCaptureSim(noise_sigma=noise, rng=np.random.default_rng(seed))
    ticks = round(duration / DT)
    trace = np.zeros((ticks, 3))
    for k in range(ticks):
        t = k * DT
        if k % 5 == 0:  # 200 Hz
            sample = mocap.sample(t, state.position)
            out = ctl.update(target, sample, CONTROL_DT, mass)
            state = DroneState(
                position=state.position,
                velocity=state.velocity,
                thrust_vector=out.thrust_vector,
                fault_flags=state.fault_flags,
            )
        state = step_dynamics(state, params, mass, DT)
        trace[k] = state.position
    return trace


class TestPayloadFeasibility:
    def test_rated_payload_is_feasible_with_zero_margin(self):
        report = payload_feasibility(DroneParams(), 1.6)
        assert report.feasible
        assert report.margin_kg == pytest.approx(0.0, abs=1e-12)

    def test_over_capacity_rejected(self):
        report = payload_feasibility(DroneParams(), 1.7)
        assert not report.feasible
        assert report.margin_kg == pytest.approx(-0.1, abs=1e-12)

    def test_light_guard_leaves_margin(self):
        report = payload_feasibility(DroneParams(), 0.6)
        assert report.feasible
        assert report.margin_kg == pytest.approx(1.0, abs=1e-12)


class TestDynamics:
    def test_hover_equilibrium(self):
        params = DroneParams()
        mass = 2.0
        state = hover_state(params, mass, z=1.5)
        for _ in range(2000):
            state = step_dynamics(state, params, mass, DT)
        assert np.max(np.abs(state.velocity)) < 1e-12
        assert state.position[2] == pytest.approx(1.5, abs=1e-12)

    def test_thrust_loss_free_fall_matches_closed_form(self):
        params = DroneParams()
        mass = 2.8
        state = hover_state(params, mass, z=2.0).with_fault(THRUST_LOSS)
        t = 0.0
        g = params.gravity
        while state.position[2] > 0.0:
            expected = 2.0 - 0.5 * g * t * t
            assert state.position[2] == pytest.approx(expected, abs=1e-4)
            state = step_dynamics(state, params, mass, DT)
            t += DT
        assert t == pytest.approx(math.sqrt(2 * 2.0 / g), abs=2 * DT)  # ~0.639 s

    def test_ten_percent_extra_thrust(self):
        params = DroneParams()
        mass = 2.0
        state = hover_state(params, mass)
        state = DroneState(
            position=state.position,
            thrust_vector=state.thrust_vector * 1.1,
        )
        after = step_dynamics(state, params, mass, DT)
        accel = (after.velocity[2] - 0.0) / DT
        assert accel == pytest.approx(0.981, abs=1e-9)

    def test_ballistic_energy_conservation(self):
        params = DroneParams(drag_coefficient=0.0)
        mass = 1.5
        state = DroneState(
            position=np.array([0.0, 0.0, 50.0]),
            velocity=np.array([3.0, -2.0, 4.0]),
        )

        def energy(s):
            return 0.5 * mass * float(s.velocity @ s.velocity) + mass * params.gravity * s.position[2]

        e0 = energy(state)
        for _ in range(1000):  # one simulated second
            state = step_dynamics(state, params, mass, DT)
        assert abs(energy(state) - e0) / abs(e0) < 1e-6

    def test_dt_bounds_enforced(self):
        with pytest.raises(ValueError):
            step_dynamics(DroneState(), DroneParams(), 1.0, 0.02)

    def test_deterministic_trajectories(self):
        params = DroneParams()
        gains = PidGains()
        a = closed_loop(params, gains, 2.0, (1.0, 0.0, 1.0), 1.0, noise=0.0005, seed=42)
        b = closed_loop(params, gains, 2.0, (1.0, 0.0, 1.0), 1.0, noise=0.0005, seed=42)
        assert np.array_equal(a, b)  # bit-identical

    def test_span_consistency_validated(self):
        with pytest.raises(ValueError):
            DroneParams(overall_span=0.9)


class TestPidController:
    def test_zero_error_outputs_gravity_feedforward(self):
        params = DroneParams()
        ctl = PositionController(PidGains(), params)
        sample = MocapSample(0.0, np.zeros(3))
        out = ctl.update(np.zeros(3), sample, CONTROL_DT, total_mass=2.0)
        assert out.thrust_vector == pytest.approx([0.0, 0.0, 2.0 * params.gravity])

    def test_integrator_clamp_bounds_output(self):
        params = DroneParams()
        gains = PidGains()
        ctl = PositionController(gains, params)
        out = None
        for k in range(4000):  # persistent 10 m error
            sample = MocapSample(k * CONTROL_DT, np.zeros(3))
            out = ctl.update(np.array([10.0, 0.0, 0.0]), sample, CONTROL_DT, 2.0)
        integral_term = gains.ki[0] * gains.integrator_clamp
        # horizontal accel never exceeds the per-axis clamp regardless of windup
        assert abs(out.thrust_vector[0] / 2.0) <= gains.output_clamp + 1e-9

    def test_sensor_loss_holds_last_command_and_faults(self):
        params = DroneParams()
        ctl = PositionController(PidGains(), params)
        good = ctl.update(np.array([0.5, 0, 0]), MocapSample(0.0, np.zeros(3)), CONTROL_DT, 2.0)
        # shortly after dropout: hold, no fault yet
        out = ctl.update(np.array([0.5, 0, 0]), MocapSample(0.05, np.zeros(3), valid=False), CONTROL_DT, 2.0)
        assert not out.sensor_fault
        assert np.allclose(out.thrust_vector, good.thrust_vector)
        # past the timeout: fault is raised, command still held
        out = ctl.update(np.array([0.5, 0, 0]), MocapSample(0.2, np.zeros(3), valid=False), CONTROL_DT, 2.0)
        assert out.sensor_fault
        assert np.allclose(out.thrust_vector, good.thrust_vector)

    def test_step_response_settles_without_excessive_overshoot(self):
        """1 m step: < 20% overshoot, settled within 0.05 m by 5 s."""
        params = DroneParams()
        trace = closed_loop(params, PidGains(), 2.0, (1.0, 0.0, 1.0), 6.0)
        x = trace[:, 0]
        assert np.max(x) - 1.0 < 0.2
        settled = x[round(5.0 / DT):]
        assert np.max(np.abs(settled - 1.0)) < 0.05

    def test_noiseless_mocap_equals_truth_feedback(self):
        params = DroneParams()
        gains = PidGains()
        mass = 2.0
        ctl_truth = PositionController(gains, params)
        ctl_mocap = PositionController(gains, params)
        mocap = MotionCaptureSim(noise_sigma=0.0)
        rng = np.random.default_rng(3)
        for k in range(50):
            t = k * CONTROL_DT
            pos = rng.normal(0, 0.3, 3)
            a = ctl_truth.update((1, 0, 1), MocapSample(t, pos), CONTROL_DT, mass)
            b = ctl_mocap.update((1, 0, 1), mocap.sample(t, pos), CONTROL_DT, mass)
            assert np.array_equal(a.thrust_vector, b.thrust_vector)

    def test_functional_wrapper_needs_history(self):
        with pytest.raises(ValueError):
            pid_update(PidGains(), np.zeros(3), [], CONTROL_DT, 2.0)

    def test_tilt_cap_limits_horizontal_thrust(self):
        params = DroneParams()
        ctl = PositionController(PidGains(), params)
        sample = MocapSample(0.0, np.zeros(3))
        out = ctl.update(np.array([50.0, 0.0, 0.0]), sample, CONTROL_DT, 2.0)
        fz = out.thrust_vector[2]
        fh = np.linalg.norm(out.thrust_vector[:2])
        assert fh <= math.tan(params.max_tilt) * fz + 1e-9


class TestTrajectory:
    def test_single_waypoint_completes_after_hold(self):
        traj = Trajectory(waypoints=((np.zeros(3), 0.5),), tolerance=0.05)
        follower = TrajectoryFollower(traj, start_position=np.zeros(3))
        t = 0.0
        while not follower.complete:
            follower.current_target(np.zeros(3), 0.01)
            t += 0.01
            assert t < 1.0
        assert t == pytest.approx(0.5, abs=0.02)

    def test_waypoints_visited_in_order(self):
        params = DroneParams()
        gains = PidGains()
        mass = 2.0
        traj = Trajectory(
            waypoints=((np.array([0.0, 0.0, 1.0]), 0.2), (np.array([1.0, 0.0, 1.0]), 0.2)),
            tolerance=0.08,
        )
        state = hover_state(params, mass)
        follower = TrajectoryFollower(traj, state.position)
        ctl = PositionController(gains, params)
        mocap = MotionCaptureSim(noise_sigma=0.0)
        progress = [0]
        for k in range(round(10.0 / DT)):
            t = k * DT
            if k % 5 == 0:
                target = follower.current_target(state.position, CONTROL_DT)
                out = ctl.update(target, mocap.sample(t, state.position), CONTROL_DT, mass)
                state = DroneState(
                    position=state.position, velocity=state.velocity,
                    thrust_vector=out.thrust_vector,
                )
                progress.append(follower.progress_index)
            state = step_dynamics(state, params, mass, DT)
        assert follower.complete
        assert np.all(np.diff(progress) >= 0)  # monotone progress
        assert state.position[0] == pytest.approx(1.0, abs=0.08)

    def test_holds_last_waypoint_after_completion(self):
        traj = Trajectory(waypoints=((np.array([1.0, 2.0, 3.0]), 0.0),), tolerance=0.1)
        follower = TrajectoryFollower(traj, np.array([1.0, 2.0, 3.0]))
        follower.current_target(np.array([1.0, 2.0, 3.0]), 0.01)
        assert follower.complete
        for _ in range(5):
            target = follower.current_target(np.array([9.0, 9.0, 9.0]), 0.01)
            assert np.allclose(target, [1.0, 2.0, 3.0])

    def test_cruise_speed_carrot_moves_at_rate(self):
        traj = Trajectory(
            waypoints=((np.array([10.0, 0.0, 0.0]), 0.0),),
            tolerance=0.05,
            cruise_speed=0.3,
        )
        follower = TrajectoryFollower(traj, np.zeros(3))
        t1 = follower.current_target(np.zeros(3), 1.0)
        t2 = follower.current_target(np.zeros(3), 1.0)
        assert t1[0] == pytest.approx(0.3, abs=1e-12)
        assert t2[0] == pytest.approx(0.6, abs=1e-12)

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ValueError):
            Trajectory(waypoints=())
