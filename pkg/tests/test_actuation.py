"""Rack-and-pinion actuation: coupling, stroke timing, command handling."""
from fractions import Fraction

import pytest

from ringguard.actuation import (
    ActuatorMode,
    ActuatorState,
    CommandQueue,
    GuardCommand,
    apply_command,
    displacement_to_theta,
    emergency_expand,
    rack_spec_for_guard,
    seek_displacement_for_radius,
    step,
    theta_to_displacement,
)
from ringguard.assembly import GuardKind, assemble
from ringguard.errors import DeploymentRangeError
from ringguard.scissor import calibrate_ring, family_radius

DT = 1e-3


@pytest.fixture(scope="module")
def rig():
    spec, dep = calibrate_ring()
    guard = assemble(GuardKind.CIRCLE, spec, dep)
    rack = rack_spec_for_guard(guard)
    return spec, dep, rack


def run_ticks(state, rack, seconds, command=None, dt=DT):
    ticks = round(seconds / dt)
    for i in range(ticks):
        state = step(state, rack, dt, command if i == 0 else None)
    return state


class TestCoupling:
    def test_endpoints_map_to_deployment_band(self, rig):
        spec, dep, rack = rig
        th0 = displacement_to_theta(rack, spec, dep, 0.0)
        th1 = displacement_to_theta(rack, spec, dep, rack.rack_stroke)
        assert th0 == pytest.approx(dep.theta_min, abs=1e-12)
        assert th1 == pytest.approx(dep.theta_max, abs=1e-12)
        # 52 cm and 85 cm outer diameters at the stroke endpoints
        assert 2 * family_radius(spec, th0) == pytest.approx(0.52, abs=1e-9)
        assert 2 * family_radius(spec, th1) == pytest.approx(0.85, abs=1e-9)

    def test_midpoint_pushes_attached_radius_exactly_halfway(self, rig):
        spec, dep, rack = rig
        theta = displacement_to_theta(rack, spec, dep, rack.rack_stroke / 2)
        lo = family_radius(spec, dep.theta_min, "inner")
        hi = family_radius(spec, dep.theta_max, "inner")
        assert family_radius(spec, theta, "inner") == pytest.approx(
            (lo + hi) / 2, abs=1e-9
        )

    def test_round_trip_displacement(self, rig):
        spec, dep, rack = rig
        for frac in (0.0, 0.2, 0.5, 0.9, 1.0):
            delta = frac * rack.rack_stroke
            theta = displacement_to_theta(rack, spec, dep, delta)
            assert theta_to_displacement(rack, spec, dep, theta) == pytest.approx(
                delta, abs=1e-9
            )

    def test_out_of_stroke_rejected(self, rig):
        spec, dep, rack = rig
        with pytest.raises(DeploymentRangeError):
            displacement_to_theta(rack, spec, dep, rack.rack_stroke + 0.01)


class TestStroke:
    def test_full_expansion_takes_six_seconds(self, rig):
        _, _, rack = rig
        state = ActuatorState()
        state = step(state, rack, DT, GuardCommand("expand"))
        ticks = 1
        while state.displacement_m < rack.rack_stroke:
            state = step(state, rack, DT)
            ticks += 1
            assert ticks < 7000
        assert abs(ticks * DT - 6.0) <= DT + 1e-12
        assert state.mode is ActuatorMode.IDLE

    def test_collapse_is_symmetric(self, rig):
        _, _, rack = rig
        state = ActuatorState(displacement=Fraction(rack.rack_stroke))
        state = step(state, rack, DT, GuardCommand("collapse"))
        ticks = 1
        while state.displacement_m > 0:
            state = step(state, rack, DT)
            ticks += 1
        assert abs(ticks * DT - 6.0) <= DT + 1e-12

    def test_half_time_reaches_half_stroke(self, rig):
        _, _, rack = rig
        state = run_ticks(ActuatorState(), rack, 3.0, GuardCommand("expand"))
        tick_size = rack.rack_stroke * DT / 6.0
        assert abs(state.displacement_m - rack.rack_stroke / 2) <= tick_size

    def test_saturated_expand_is_a_no_op(self, rig):
        _, _, rack = rig
        full = ActuatorState(displacement=Fraction(rack.rack_stroke))
        after = step(full, rack, DT, GuardCommand("expand"))
        assert after.displacement == full.displacement
        assert after.mode is ActuatorMode.IDLE

    def test_time_reversal_returns_exactly(self, rig):
        _, _, rack = rig
        state = ActuatorState()
        state = run_ticks(state, rack, 2.5, GuardCommand("expand"))
        mark = state.displacement
        assert mark > 0
        state = run_ticks(state, rack, 1.0, GuardCommand("collapse"))
        state = run_ticks(state, rack, 1.0, GuardCommand("expand"))
        assert state.displacement == mark  # exact, not approximate

    def test_rate_is_lipschitz_bounded(self, rig):
        _, _, rack = rig
        state = ActuatorState()
        state = step(state, rack, DT, GuardCommand("expand"))
        prev = state.displacement_m
        bound = rack.nominal_rate * DT
        for _ in range(100):
            state = step(state, rack, DT)
            assert abs(state.displacement_m - prev) <= bound + 1e-15
            prev = state.displacement_m

    def test_seek_stops_at_target_radius(self, rig):
        spec, dep, rack = rig
        state = ActuatorState()
        state = step(
            state, rack, DT, GuardCommand("seek", radius_m=0.30),
            ring_spec=spec, deployment=dep,
        )
        for _ in range(8000):
            if state.mode is ActuatorMode.IDLE:
                break
            state = step(state, rack, DT)
        assert state.mode is ActuatorMode.IDLE
        target = seek_displacement_for_radius(rack, spec, dep, 0.30)
        assert state.displacement_m == pytest.approx(target, abs=1e-12)


class TestEmergency:
    def test_idle_collapsed_starts_expanding(self):
        state = emergency_expand(ActuatorState())
        assert state.mode is ActuatorMode.EXPANDING

    def test_idempotent(self):
        state = emergency_expand(emergency_expand(ActuatorState()))
        assert state.mode is ActuatorMode.EXPANDING

    def test_overrides_seek(self, rig):
        spec, dep, rack = rig
        state = apply_command(
            ActuatorState(), rack, GuardCommand("seek", radius_m=0.30), spec, dep
        )
        assert state.mode is ActuatorMode.SEEK
        state = emergency_expand(state)
        assert state.mode is ActuatorMode.EXPANDING
        assert state.seek_target is None


class TestCommandQueue:
    def test_latency_delays_normal_commands(self):
        q = CommandQueue()
        q.push(GuardCommand("expand"), now=0.0, latency=0.02)
        assert q.pop_due(0.0) is None
        assert q.pop_due(0.019) is None
        cmd = q.pop_due(0.02)
        assert cmd is not None and cmd.action == "expand"

    def test_emergency_skips_latency(self):
        q = CommandQueue()
        q.push(GuardCommand("emergency"), now=0.0, latency=0.02)
        cmd = q.pop_due(0.0)
        assert cmd is not None and cmd.is_emergency

    def test_latest_command_wins_within_a_tick(self):
        q = CommandQueue()
        q.push(GuardCommand("expand"), now=0.0, latency=0.0)
        q.push(GuardCommand("collapse"), now=0.0, latency=0.0)
        assert q.pop_due(0.0).action == "collapse"
        assert q.pop_due(0.0) is None

    def test_emergency_outranks_later_commands(self):
        q = CommandQueue()
        q.push(GuardCommand("emergency"), now=0.0, latency=0.0)
        q.push(GuardCommand("collapse"), now=0.0, latency=0.0)
        assert q.pop_due(0.0).is_emergency
