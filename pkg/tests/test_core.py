import math

import pytest
from hypothesis import given, strategies as st

from quadplane.core import (Atmosphere, FlightCondition, FlightMode,
                            ForcesMoments, PropModule, VehicleGeometry,
                            body_to_wind, prop_alpha, quadplane_v1_geometry,
                            reynolds, wind_to_body, wing_alpha)
from quadplane.exceptions import DomainError, FrameError


class TestReynolds:
    @pytest.mark.parametrize("v,expected", [(5, 50_427), (11, 110_939), (15, 151_281)])
    def test_tabulated_tunnel_speeds(self, v, expected):
        assert reynolds(v, 0.1524, 1.5111e-5) == pytest.approx(expected, abs=1)

    def test_zero_airspeed(self):
        assert reynolds(0, 0.1524, 1.5111e-5) == 0

    def test_negative_input_rejected(self):
        with pytest.raises(DomainError):
            reynolds(-1, 0.1524, 1.5111e-5)
        with pytest.raises(DomainError):
            reynolds(5, 0.1524, 0.0)

    @given(st.floats(0, 50), st.floats(0.1, 10))
    def test_linear_in_airspeed(self, v, k):
        assert reynolds(k * v, 0.1524, 1.5111e-5) == pytest.approx(
            k * reynolds(v, 0.1524, 1.5111e-5), rel=1e-12, abs=1e-9)


class TestAngles:
    def test_wing_incidence_offset(self):
        assert wing_alpha(0, 5) == 5
        assert wing_alpha(-5, 5) == 0
        assert wing_alpha(10, 5) == 15

    def test_prop_alpha_forward(self):
        assert prop_alpha(5, PropModule.FORWARD) == 5

    def test_prop_alpha_vertical(self):
        assert prop_alpha(5, PropModule.VERTICAL) == 95
        assert prop_alpha(0, PropModule.VERTICAL) == 90

    @given(st.floats(-90, 90))
    def test_module_offset_constant(self, alpha):
        assert prop_alpha(alpha, PropModule.FORWARD) - prop_alpha(
            alpha, PropModule.VERTICAL) == pytest.approx(-90.0)


def _rotation_oracle(fx, fz, alpha_deg):
    """Independent 2-D rotation-matrix computation of (lift, drag)."""
    a = math.radians(alpha_deg)
    # wind x along drag direction, wind z along negative lift
    drag = -(math.cos(a) * fx + math.sin(a) * fz)
    lift = -(-math.sin(a) * fx + math.cos(a) * fz)
    return lift, drag


class TestFrameRotation:
    def test_alpha_zero_sign_flips(self):
        lift, drag, side = body_to_wind(
            ForcesMoments(frame="body", fx=-2, fz=-10), 0.0)
        assert (lift, drag, side) == (10, 2, 0)

    def test_pure_rotation_at_90(self):
        lift, drag, _ = body_to_wind(ForcesMoments(frame="body", fx=0, fz=-10), 90.0)
        assert lift == pytest.approx(0, abs=1e-12)
        assert drag == pytest.approx(10)

    def test_five_degree_case_against_oracle(self):
        lift, drag, _ = body_to_wind(ForcesMoments(frame="body", fx=-1, fz=-8), 5.0)
        exp_l, exp_d = _rotation_oracle(-1, -8, 5.0)
        assert lift == pytest.approx(exp_l, rel=1e-12)
        assert drag == pytest.approx(exp_d, rel=1e-12)
        assert lift == pytest.approx(7.882, abs=1e-3)
        assert drag == pytest.approx(1.694, abs=1e-3)

    def test_frame_mismatch_rejected(self):
        with pytest.raises(FrameError):
            body_to_wind(ForcesMoments(frame="wind", fx=1, fz=1), 0.0)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-180, 180))
    def test_norm_preserved(self, fx, fz, alpha):
        lift, drag, _ = body_to_wind(ForcesMoments(frame="body", fx=fx, fz=fz), alpha)
        assert math.hypot(lift, drag) == pytest.approx(math.hypot(fx, fz),
                                                       rel=1e-12, abs=1e-12)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-10, 50),
           st.floats(-180, 180))
    def test_round_trip_identity(self, lift, drag, side, alpha):
        body = wind_to_body(lift, drag, side, alpha)
        l2, d2, s2 = body_to_wind(body, alpha)
        assert l2 == pytest.approx(lift, rel=1e-12, abs=1e-12)
        assert d2 == pytest.approx(drag, rel=1e-12, abs=1e-12)
        assert s2 == side


class TestVehicleGeometry:
    def test_builtin_profile_values(self):
        g = quadplane_v1_geometry()
        assert g.wing_span == 1.2192
        assert g.wing_chord == 0.1524
        assert g.aspect_ratio == pytest.approx(8.0)
        assert g.planform_area == pytest.approx(1.2192 * 0.1524, rel=1e-12)
        assert g.weight == pytest.approx(1.684 * 9.81, rel=1e-12)
        assert g.quad_arm == 0.4826

    def test_inconsistent_area_rejected(self):
        with pytest.raises(DomainError):
            VehicleGeometry(wing_span=1.2, wing_chord=0.15, planform_area=0.5,
                            aspect_ratio=8, oswald_e=0.95, incidence_deg=5,
                            quad_arm=0.48, mass=1.7, weight=1.7 * 9.81)

    def test_inconsistent_weight_rejected(self):
        with pytest.raises(DomainError):
            VehicleGeometry(wing_span=1.2192, wing_chord=0.1524,
                            planform_area=1.2192 * 0.1524, aspect_ratio=8.0,
                            oswald_e=0.95, incidence_deg=5, quad_arm=0.4826,
                            mass=1.684, weight=20.0)


class TestFlightCondition:
    def test_plane_mode_forbids_vertical_motors(self):
        with pytest.raises(DomainError):
            FlightCondition(mode="plane", alpha_deg=0, airspeed=11, esc_quad=1500)

    def test_quad_mode_forbids_forward_motor(self):
        with pytest.raises(DomainError):
            FlightCondition(mode="quad", alpha_deg=0, airspeed=0, esc_fwd=1500)

    def test_esc_range_enforced(self):
        with pytest.raises(DomainError):
            FlightCondition(mode="hybrid", alpha_deg=0, airspeed=5, esc_fwd=900)

    def test_negative_airspeed_rejected(self):
        with pytest.raises(DomainError):
            FlightCondition(mode="plane", alpha_deg=0, airspeed=-1)

    def test_mode_parsing_from_string(self):
        c = FlightCondition(mode="Hybrid", alpha_deg=0, airspeed=5,
                            esc_fwd=1750, esc_quad=1550)
        assert c.mode is FlightMode.HYBRID


def test_atmosphere_rejects_nonpositive():
    with pytest.raises(DomainError):
        Atmosphere(density=0)
