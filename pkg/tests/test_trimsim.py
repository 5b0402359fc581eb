import math

import pytest

from quadplane.aero import total_wrench
from quadplane.core import VehicleGeometry, quadplane_v1_geometry
from quadplane.exceptions import InfeasibleError
from quadplane.trimsim import (envelope, hover_trim, level_trim,
                               transition_schedule)


def _geometry_with_mass(mass):
    g = quadplane_v1_geometry()
    return VehicleGeometry.from_span_chord(
        span=g.wing_span, chord=g.wing_chord, oswald_e=g.oswald_e,
        incidence_deg=g.incidence_deg, quad_arm=g.quad_arm, mass=mass)


class TestHoverTrim:
    def test_weight_balanced_to_tolerance(self, db):
        sol = hover_trim(db.geometry, db.thrust_map)
        assert sol.feasible
        assert sol.force_residual < 1e-6
        assert sol.t_vert == pytest.approx(db.geometry.weight, abs=1e-6)
        # forward evaluation confirms the solved command
        per_motor = db.thrust_map.thrust(90, 0, sol.condition.esc_quad)
        assert per_motor == pytest.approx(db.geometry.weight / 4, abs=1e-6)
        assert 1250 < sol.condition.esc_quad < 2000

    def test_weightless_is_idle(self, db):
        sol = hover_trim(_geometry_with_mass(1e-12), db.thrust_map)
        # vanishing weight: commanded thrust indistinguishable from idle
        assert sol.t_vert == pytest.approx(0.0, abs=1e-6)

    def test_overweight_infeasible(self, db):
        with pytest.raises(InfeasibleError) as exc:
            hover_trim(_geometry_with_mass(200 / 9.81), db.thrust_map)
        assert exc.value.reason == "thrust"


class TestPlaneTrim:
    def test_cruise_alpha(self, db):
        sol = level_trim("plane", 11, db.aero_model, db.thrust_map,
                         db.geometry, db.atmosphere)
        assert sol.condition.alpha_deg == pytest.approx(8.07, abs=0.1)
        assert sol.feasible
        assert sol.t_vert == 0
        # drag is carried by the forward motor; elevator inside its range
        assert 0 < sol.t_fwd < db.thrust_map.max_thrust(sol.condition.alpha_deg, 11)
        assert abs(sol.condition.elevator) < 1.0
        # the unfolded thrust-tilt component stays under a newton, reported
        assert abs(sol.tilt_residual) < 1.0

    def test_transition_speed_is_stall_bound(self, db):
        with pytest.raises(InfeasibleError) as exc:
            level_trim("plane", 5, db.aero_model, db.thrust_map, db.geometry,
                       db.atmosphere)
        assert exc.value.reason == "stall"
        assert exc.value.detail["required_c_lift"] > exc.value.detail["max_c_lift"]

    def test_zero_airspeed_infeasible(self, db):
        with pytest.raises(InfeasibleError) as exc:
            level_trim("plane", 0, db.aero_model, db.thrust_map, db.geometry,
                       db.atmosphere)
        assert exc.value.reason == "no-lift"

    def test_alpha_solution_unique_by_monotonicity(self, db):
        # linear pre-stall lift: a single bracketing root
        from quadplane.trimsim import _ForceEvaluator
        from quadplane.core import FlightMode
        ev = _ForceEvaluator(db.aero_model, FlightMode.PLANE, db.atmosphere,
                             db.geometry)
        alphas = [-5 + 0.5 * i for i in range(31)]
        cls = [ev.lift_coefficient(a, 11) for a in alphas]
        assert all(b > a for a, b in zip(cls, cls[1:]))


class TestHybridTrim:
    def test_closed_form_at_zero_alpha(self, db):
        sol = level_trim("hybrid", 5, db.aero_model, db.thrust_map,
                         db.geometry, db.atmosphere, alpha_deg=0.0)
        from quadplane.aero import lift_drag_forces
        from quadplane.core import FlightCondition
        c = FlightCondition(mode="hybrid", alpha_deg=0, airspeed=5,
                            esc_quad=1550, esc_fwd=1750)
        lift, drag = lift_drag_forces(db.aero_model, c, db.atmosphere, db.geometry)
        assert sol.t_vert == pytest.approx(db.geometry.weight - lift, rel=1e-9)
        assert sol.t_fwd == pytest.approx(drag, rel=1e-9)
        assert sol.force_residual < 1e-9
        assert sol.moment_residual < 1e-9

    def test_balance_substitutes_back_into_wrench(self, db):
        # feasible solutions satisfy the load-cell balance with gravity
        for v, alpha in ((5, 0.0), (5, 5.0), (11, 5.0)):
            sol = level_trim("hybrid", v, db.aero_model, db.thrust_map,
                             db.geometry, db.atmosphere, alpha_deg=alpha,
                             strict=False)
            theta = math.radians(alpha)
            from quadplane.aero import lift_drag_forces
            from quadplane.core import FlightCondition
            c = FlightCondition(mode="hybrid", alpha_deg=alpha, airspeed=v,
                                esc_quad=1550, esc_fwd=1750)
            lift, drag = lift_drag_forces(db.aero_model, c, db.atmosphere,
                                          db.geometry)
            rx = sol.t_fwd + lift * math.sin(theta) \
                - drag * math.cos(theta) - db.geometry.weight * math.sin(theta)
            rz = db.geometry.weight * math.cos(theta) - lift * math.cos(theta) \
                - drag * math.sin(theta) - sol.t_vert
            assert abs(rx) < 1e-9
            assert abs(rz) < 1e-9

    def test_quad_mode_cannot_hold_airspeed(self, db):
        with pytest.raises(InfeasibleError) as exc:
            level_trim("quad", 5, db.aero_model, db.thrust_map, db.geometry,
                       db.atmosphere)
        assert exc.value.reason == "no-forward-thrust"

    def test_quad_mode_at_rest_is_hover(self, db):
        sol = level_trim("quad", 0, db.aero_model, db.thrust_map, db.geometry,
                         db.atmosphere)
        assert sol.t_vert == pytest.approx(db.geometry.weight, abs=1e-6)

    def test_cruise_forward_thrust_saturates(self, db):
        # drag at 11 m/s exceeds the available dynamic thrust: flagged
        sol = level_trim("hybrid", 11, db.aero_model, db.thrust_map,
                         db.geometry, db.atmosphere, alpha_deg=0.0, strict=False)
        assert not sol.feasible
        assert "fwd-thrust-saturated" in sol.constraints
        with pytest.raises(InfeasibleError):
            level_trim("hybrid", 11, db.aero_model, db.thrust_map,
                       db.geometry, db.atmosphere, alpha_deg=0.0, strict=True)

    def test_low_speed_solutions_are_flagged_as_blend(self, db):
        sol = level_trim("hybrid", 2.5, db.aero_model, db.thrust_map,
                         db.geometry, db.atmosphere, alpha_deg=0.0, strict=False)
        assert "low-speed-blend" in sol.flags
        assert 0 < sol.t_vert < 1.05 * db.geometry.weight

    def test_differential_thrust_backs_up_a_saturated_elevator(self, db):
        # the shipped elevator never saturates in a feasible trim, so weaken
        # it to drive the fallback path
        import dataclasses
        from quadplane.aero import ElevatorMomentFit
        weak = dataclasses.replace(
            db.aero_model,
            pitch_elevator={b: ElevatorMomentFit(c_de=0.05)
                            for b in db.aero_model.buckets})
        sol = level_trim("hybrid", 5, weak, db.thrust_map, db.geometry,
                         db.atmosphere, alpha_deg=0.0, strict=False)
        assert abs(sol.condition.elevator) == 1.0
        assert any("differential vertical thrust" in c for c in sol.constraints)
        assert sol.feasible  # the fallback absorbs the leftover moment

        strict_pitch = level_trim("hybrid", 5, weak, db.thrust_map,
                                  db.geometry, db.atmosphere, alpha_deg=0.0,
                                  pitch_policy="elevator-only", strict=False)
        assert not strict_pitch.feasible
        assert "pitch-authority-exceeded" in strict_pitch.constraints
        assert strict_pitch.moment_residual > 0


class TestTransition:
    def test_accelerating_schedule_monotone_vertical_thrust(self, db):
        sched = transition_schedule(0, 11, 12, db.aero_model, db.thrust_map,
                                    db.geometry, db.atmosphere)
        tv = sched.vertical_thrusts()
        assert len(tv) == 12
        assert sched.direction == "accelerate"
        assert all(b <= a + 1e-9 for a, b in zip(tv, tv[1:]))
        assert tv[0] == pytest.approx(db.geometry.weight, abs=1e-6)

    def test_decelerating_schedule_mirrors(self, db):
        sched = transition_schedule(11, 0, 12, db.aero_model, db.thrust_map,
                                    db.geometry, db.atmosphere)
        tv = sched.vertical_thrusts()
        assert sched.direction == "decelerate"
        assert all(b >= a - 1e-9 for a, b in zip(tv, tv[1:]))

    def test_degenerate_schedule_is_single_hover(self, db):
        sched = transition_schedule(0, 0, 5, db.aero_model, db.thrust_map,
                                    db.geometry, db.atmosphere)
        assert len(sched.entries) == 1
        assert sched.entries[0].t_vert == pytest.approx(db.geometry.weight,
                                                        abs=1e-6)

    def test_infeasible_steps_flagged_not_fatal(self, db):
        sched = transition_schedule(0, 15, 16, db.aero_model, db.thrust_map,
                                    db.geometry, db.atmosphere)
        assert len(sched.entries) == 16
        assert any(not e.feasible for e in sched.entries)
        # forward thrust saturation appears at the fast end
        assert "fwd-thrust-saturated" in sched.entries[-1].constraints


class TestEnvelope:
    def test_plane_mode_stall_bound_at_low_speed(self, db):
        cells = envelope("plane", db.aero_model, db.thrust_map, db.geometry,
                         db.atmosphere, va_grid=(5.0,))
        assert len(cells) == 4
        assert all(not c.feasible for c in cells)
        assert all(c.binding == "stall" for c in cells)

    def test_quad_mode_hover_cell_feasible(self, db):
        cells = envelope("quad", db.aero_model, db.thrust_map, db.geometry,
                         db.atmosphere, alpha_grid=(0.0,), va_grid=(0.0, 5.0))
        by_va = {c.airspeed: c for c in cells}
        assert by_va[0.0].feasible
        assert not by_va[5.0].feasible
        assert by_va[5.0].binding == "no-forward-thrust"

    def test_hybrid_cruise_reports_thrust_margin(self, db):
        cells = envelope("hybrid", db.aero_model, db.thrust_map, db.geometry,
                         db.atmosphere, alpha_grid=(0.0,), va_grid=(11.0,))
        cell = cells[0]
        # forward thrust is the binding constraint at cruise: the drag exceeds
        # the available dynamic thrust (the airframe is underpowered there)
        assert not cell.feasible
        assert cell.binding == "fwd-thrust"
        assert cell.margins["t_fwd_margin_N"] < 0
        assert cell.margins["t_vert_margin_N"] > 0

    def test_hybrid_low_speed_feasible(self, db):
        cells = envelope("hybrid", db.aero_model, db.thrust_map, db.geometry,
                         db.atmosphere, alpha_grid=(0.0, 5.0), va_grid=(5.0,))
        assert all(c.feasible for c in cells)


class TestWrenchSelfConsistency:
    def test_feasible_trims_close_the_force_balance(self, db):
        # substitute solved commands back through the full wrench and add
        # body-frame gravity; hybrid/quad solves must balance to thresholds
        sols = [
            hover_trim(db.geometry, db.thrust_map),
            level_trim("hybrid", 5, db.aero_model, db.thrust_map, db.geometry,
                       db.atmosphere, alpha_deg=0.0),
        ]
        for sol in sols:
            c = sol.condition
            w = total_wrench(db.aero_model, db.thrust_map, c, db.atmosphere,
                             db.geometry, check_domain=False)
            theta = math.radians(c.pitch_deg)
            gx = -db.geometry.weight * math.sin(theta)
            gz = db.geometry.weight * math.cos(theta)
            assert abs(w.fx + gx) < 0.05
            # solved elevator zeroes the model pitching moment, so the
            # rear-pair deficit in the wrench vanishes and z closes too
            assert abs(w.fz + gz) < 0.05
            assert abs(w.my) < 0.01
