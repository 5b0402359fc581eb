"""Per-mode, per-airspeed-bucket aerodynamic coefficient models.

The suite is organized around the three tested tunnel speeds (5, 11, 15 m/s,
the "Reynolds buckets"). Within a bucket every coefficient is a low-order
polynomial in vehicle angle of attack or in a control-surface deflection:

* lift: linear in alpha, valid up to the measured stall boundary
  (5 deg at the 5 m/s bucket, 10 deg at 11/15 m/s),
* drag: quadratic in alpha over the full tested range (-5..10 deg), split
  into a form-drag part shared by all modes and a mode-specific total,
* rotor drag of the spinning vertical modules: multiplies airspeed linearly
  (not quadratically); zero by definition in plane mode,
* pitching moment: structural linear-in-alpha part plus elevator term, and
  for quad/hybrid modes an additive differential-thrust moment (N*m) that is
  quadratic in alpha,
* lateral: rolling/yawing moment linear in aileron and rudder deflection
  (no intercept) and side force linear in rudder (with intercept).

Deflections are normalized fractions in [-1, 1] of the tested command scale,
so a -80 % command enters the model as -0.8.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (Atmosphere, FlightCondition, FlightMode, ForcesMoments,
                   PropModule, VehicleGeometry, prop_alpha, wind_to_body)
from .exceptions import DomainError, EnvelopeError, StallDomainError
from .propulsion import ThrustMap

BUCKETS = (5, 11, 15)
ALPHA_DOMAIN = (-5.0, 10.0)
DEFAULT_STALL_BOUNDARY = {5: 5.0, 11: 10.0, 15: 10.0}
BUCKET_SNAP_TOLERANCE = 1.0  # m/s; beyond this, callers must interpolate


@dataclass(frozen=True)
class FitMeta:
    mode: FlightMode | None = None
    airspeed: int | None = None
    reynolds: float | None = None
    r_squared: float | None = None
    rmse: float | None = None


@dataclass(frozen=True)
class LiftFit:
    """CL = c0 + c_alpha * alpha_deg, pre-stall only."""

    c0: float
    c_alpha: float
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, alpha_deg: float) -> float:
        return self.c0 + self.c_alpha * alpha_deg

    def zero_lift_alpha(self) -> float:
        return -self.c0 / self.c_alpha


@dataclass(frozen=True)
class DragFit:
    """CD = c0 + c_alpha*alpha + c_alpha2*alpha^2 (total or form drag)."""

    c0: float
    c_alpha: float
    c_alpha2: float
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, alpha_deg: float) -> float:
        return self.c0 + alpha_deg * (self.c_alpha + alpha_deg * self.c_alpha2)

    def argmin(self) -> float:
        if self.c_alpha2 <= 0:
            raise DomainError("argmin undefined for non-convex drag fit")
        return -self.c_alpha / (2.0 * self.c_alpha2)


@dataclass(frozen=True)
class QuadDragFit:
    """Lumped rotor-drag coefficient, multiplies airspeed linearly (N*s/m).

    Linear form by default; the quadratic alternative keeps c_alpha2.
    """

    c0: float
    c_alpha: float
    c_alpha2: float | None = None
    form: str = "linear"
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, alpha_deg: float) -> float:
        out = self.c0 + self.c_alpha * alpha_deg
        if self.form == "quadratic":
            out += (self.c_alpha2 or 0.0) * alpha_deg * alpha_deg
        return out


@dataclass(frozen=True)
class PitchMomentFit:
    """Structural pitching-moment coefficient: CM = c0 + c_alpha*alpha."""

    c0: float
    c_alpha: float
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, alpha_deg: float) -> float:
        return self.c0 + self.c_alpha * alpha_deg


@dataclass(frozen=True)
class ElevatorMomentFit:
    """Elevator contribution to CM per unit normalized deflection."""

    c_de: float
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, elevator: float) -> float:
        return self.c_de * elevator


@dataclass(frozen=True)
class DiffThrustMomentFit:
    """Front/rear vertical-thrust imbalance moment (N*m), quadratic in alpha."""

    c0: float
    c_alpha: float
    c_alpha2: float
    meta: FitMeta = field(default_factory=FitMeta)

    def value(self, alpha_deg: float) -> float:
        return self.c0 + alpha_deg * (self.c_alpha + alpha_deg * self.c_alpha2)


@dataclass(frozen=True)
class LateralModel:
    """Control-surface lateral coefficients for one airspeed bucket."""

    c_rm_da: float
    c_rm_dr: float
    c_ym_da: float
    c_ym_dr: float
    c_sf0: float
    c_sf_dr: float
    meta: FitMeta = field(default_factory=FitMeta)

    def roll_coefficient(self, aileron: float, rudder: float) -> float:
        return self.c_rm_da * aileron + self.c_rm_dr * rudder

    def yaw_coefficient(self, aileron: float, rudder: float) -> float:
        return self.c_ym_da * aileron + self.c_ym_dr * rudder

    def side_force_coefficient(self, rudder: float) -> float:
        return self.c_sf0 + self.c_sf_dr * rudder


@dataclass(frozen=True)
class MomentModel:
    """Assembled pitching-moment pieces for one (mode, bucket)."""

    cm0: float
    cm_alpha: float
    cm_de: float
    mdt0: float | None
    mdt_alpha: float | None
    mdt_alpha2: float | None


@dataclass(frozen=True)
class AeroModel:
    """Complete fitted coefficient suite for one vehicle."""

    lift: dict[tuple[FlightMode, int], LiftFit]
    drag: dict[tuple[FlightMode, int], DragFit]
    form_drag: dict[int, DragFit]
    quad_drag: dict[tuple[FlightMode, int, str], QuadDragFit]
    pitch: dict[int, PitchMomentFit]
    pitch_elevator: dict[int, ElevatorMomentFit]
    diff_thrust: dict[tuple[FlightMode, int], DiffThrustMomentFit]
    lateral: dict[int, LateralModel]
    stall_boundary: dict[int, float] = field(
        default_factory=lambda: dict(DEFAULT_STALL_BOUNDARY))
    buckets: tuple[int, ...] = BUCKETS
    alpha_domain: tuple[float, float] = ALPHA_DOMAIN

    # -- bucket and domain handling -----------------------------------------

    def bucket_for(self, airspeed: float) -> int:
        """Nearest coefficient bucket, only when within 1 m/s of one."""
        best = min(self.buckets, key=lambda b: abs(airspeed - b))
        if abs(airspeed - best) > BUCKET_SNAP_TOLERANCE + 1e-9:
            raise EnvelopeError(
                f"airspeed {airspeed:g} m/s is not near a fitted bucket "
                f"{self.buckets}; use mesh interpolation for intermediate speeds"
            )
        return best

    def check_alpha(self, alpha_deg: float, bucket: int, *, lift_domain: bool) -> None:
        lo, hi = self.alpha_domain
        if lift_domain:
            hi = self.stall_boundary[bucket]
        if not lo - 1e-9 <= alpha_deg <= hi + 1e-9:
            raise StallDomainError(
                f"alpha={alpha_deg:g} deg outside fitted domain [{lo:g}, {hi:g}] "
                f"for the {bucket} m/s bucket"
                + (" (post-stall lift is not modeled)" if lift_domain else "")
            )

    # -- coefficient evaluation ----------------------------------------------

    def c_lift(self, mode: FlightMode, bucket: int, alpha_deg: float,
               check_domain: bool = True) -> float:
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=True)
        return self.lift[(FlightMode.parse(mode), bucket)].value(alpha_deg)

    def c_drag_plane(self, mode: FlightMode, bucket: int, alpha_deg: float,
                     check_domain: bool = True) -> float:
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=False)
        return self.drag[(FlightMode.parse(mode), bucket)].value(alpha_deg)

    def c_form_drag(self, bucket: int, alpha_deg: float,
                    check_domain: bool = True) -> float:
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=False)
        return self.form_drag[bucket].value(alpha_deg)

    def c_quad_drag(self, mode: FlightMode, bucket: int, alpha_deg: float,
                    fit: str = "linear", check_domain: bool = True) -> float:
        mode = FlightMode.parse(mode)
        if mode is FlightMode.PLANE:
            return 0.0  # vertical modules off: no rotor drag by definition
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=False)
        return self.quad_drag[(mode, bucket, fit)].value(alpha_deg)

    def c_moment(self, bucket: int, alpha_deg: float, elevator: float = 0.0,
                 check_domain: bool = True) -> float:
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=False)
        return (self.pitch[bucket].value(alpha_deg)
                + self.pitch_elevator[bucket].value(elevator))

    def diff_thrust_moment(self, mode: FlightMode, bucket: int, alpha_deg: float,
                           check_domain: bool = True) -> float:
        mode = FlightMode.parse(mode)
        if mode is FlightMode.PLANE:
            return 0.0
        if check_domain:
            self.check_alpha(alpha_deg, bucket, lift_domain=False)
        return self.diff_thrust[(mode, bucket)].value(alpha_deg)

    def moment_model(self, mode: FlightMode, bucket: int) -> MomentModel:
        mode = FlightMode.parse(mode)
        mdt = self.diff_thrust.get((mode, bucket))
        return MomentModel(
            cm0=self.pitch[bucket].c0,
            cm_alpha=self.pitch[bucket].c_alpha,
            cm_de=self.pitch_elevator[bucket].c_de,
            mdt0=mdt.c0 if mdt else None,
            mdt_alpha=mdt.c_alpha if mdt else None,
            mdt_alpha2=mdt.c_alpha2 if mdt else None,
        )

    # -- structural validation -------------------------------------------------

    def validate(self) -> list[str]:
        """Check shipped-suite invariants; returns a list of violations."""
        problems = []
        for mode in (FlightMode.QUAD, FlightMode.HYBRID, FlightMode.PLANE):
            for b in self.buckets:
                if (mode, b) not in self.lift:
                    problems.append(f"missing lift fit ({mode.value}, {b})")
                elif self.lift[(mode, b)].c_alpha <= 0:
                    problems.append(f"lift slope not positive ({mode.value}, {b})")
                if (mode, b) not in self.drag:
                    problems.append(f"missing drag fit ({mode.value}, {b})")
                elif self.drag[(mode, b)].c_alpha2 < 0:
                    problems.append(f"drag not convex ({mode.value}, {b})")
        for mode in (FlightMode.QUAD, FlightMode.HYBRID):
            for b in self.buckets:
                for form in ("linear", "quadratic"):
                    if (mode, b, form) not in self.quad_drag:
                        problems.append(f"missing rotor-drag fit ({mode.value}, {b}, {form})")
                if (mode, b) not in self.diff_thrust:
                    problems.append(f"missing differential-thrust fit ({mode.value}, {b})")
            if mode is FlightMode.HYBRID:
                for b in self.buckets:
                    fit = self.quad_drag.get((mode, b, "linear"))
                    if fit and fit.c_alpha >= 0:
                        problems.append(f"hybrid rotor-drag slope not negative ({b})")
        for b in self.buckets:
            if self.pitch[b].c_alpha >= 0:
                problems.append(f"pitch stiffness not negative at {b} m/s")
            lat = self.lateral[b]
            if lat.c_rm_da <= 0:
                problems.append(f"aileron roll authority not positive at {b} m/s")
            if lat.c_ym_dr <= 0:
                problems.append(f"rudder yaw authority not positive at {b} m/s")
            if lat.c_sf_dr >= 0:
                problems.append(f"rudder side-force slope not negative at {b} m/s")
            if abs(lat.c_sf0) >= 0.05:
                problems.append(f"neutral side-force intercept too large at {b} m/s")
        return problems


# -- force and moment assembly ------------------------------------------------


def dynamic_pressure_area(atmosphere: Atmosphere, airspeed: float,
                          geometry: VehicleGeometry) -> float:
    """q*S = 0.5*rho*V^2*S, the force per unit coefficient."""
    return 0.5 * atmosphere.density * airspeed * airspeed * geometry.planform_area


def c_drag_form_from_measurement(drag: float, c_lift: float, airspeed: float,
                                 geometry: VehicleGeometry,
                                 atmosphere: Atmosphere) -> float:
    """Back out the form-drag coefficient from a measured plane-mode drag.

    Subtracts the finite-wing induced term CL^2/(pi*e*AR) from the total drag
    coefficient. Only meaningful for plane-mode data (no rotor drag term).
    """
    if airspeed <= 0:
        raise DomainError("form-drag extraction requires positive airspeed")
    qs = dynamic_pressure_area(atmosphere, airspeed, geometry)
    return drag / qs - c_lift * c_lift / geometry.induced_drag_denominator


def lift_drag_forces(model: AeroModel, condition: FlightCondition,
                     atmosphere: Atmosphere, geometry: VehicleGeometry,
                     quad_drag_fit: str = "linear",
                     check_domain: bool = True) -> tuple[float, float]:
    """Aerodynamic lift and drag (N) in the wind frame.

    Drag combines the rotor term (linear in V, quad/hybrid only) with the
    conventional quadratic-pressure term. Zero airspeed returns (0, 0).
    """
    v = condition.airspeed
    if v == 0:
        return 0.0, 0.0
    bucket = model.bucket_for(v)
    cl = model.c_lift(condition.mode, bucket, condition.alpha_deg, check_domain)
    cdp = model.c_drag_plane(condition.mode, bucket, condition.alpha_deg, check_domain)
    cdq = model.c_quad_drag(condition.mode, bucket, condition.alpha_deg,
                            quad_drag_fit, check_domain)
    qs = dynamic_pressure_area(atmosphere, v, geometry)
    return cl * qs, cdq * v + cdp * qs


def pitching_moment(model: AeroModel, condition: FlightCondition,
                    atmosphere: Atmosphere, geometry: VehicleGeometry,
                    check_domain: bool = True) -> float:
    """Pitching moment about the cg (N*m), including differential thrust."""
    v = condition.airspeed
    if v == 0:
        return 0.0
    bucket = model.bucket_for(v)
    qsc = dynamic_pressure_area(atmosphere, v, geometry) * geometry.wing_chord
    structural = qsc * model.c_moment(bucket, condition.alpha_deg,
                                      condition.elevator, check_domain)
    differential = 0.0
    if condition.mode is not FlightMode.PLANE and condition.esc_quad > 1000.0:
        differential = model.diff_thrust_moment(condition.mode, bucket,
                                                condition.alpha_deg, check_domain)
    return structural + differential


def lateral_wrench(model: AeroModel, condition: FlightCondition,
                   atmosphere: Atmosphere, geometry: VehicleGeometry,
                   check_domain: bool = True) -> tuple[float, float, float]:
    """Side force (N) and rolling/yawing moments (N*m) from deflections."""
    v = condition.airspeed
    if v == 0:
        return 0.0, 0.0, 0.0
    bucket = model.bucket_for(v)
    if check_domain:
        model.check_alpha(condition.alpha_deg, bucket, lift_domain=False)
    lat = model.lateral[bucket]
    qs = dynamic_pressure_area(atmosphere, v, geometry)
    qsc = qs * geometry.wing_chord
    mx = qsc * lat.roll_coefficient(condition.aileron, condition.rudder)
    mz = qsc * lat.yaw_coefficient(condition.aileron, condition.rudder)
    sf = qs * lat.side_force_coefficient(condition.rudder)
    return sf, mx, mz


def total_wrench(model: AeroModel, thrust_map: ThrustMap,
                 condition: FlightCondition, atmosphere: Atmosphere,
                 geometry: VehicleGeometry, quad_drag_fit: str = "linear",
                 check_domain: bool = True) -> ForcesMoments:
    """Net external body-frame wrench: aero plus propulsion, weight excluded.

    This reproduces what a load cell holding the vehicle would read. Modules
    commanded to idle (1000 us) contribute no force; an active vertical group
    produces 4x the isolated-module dynamic thrust debited by the modeled
    pitching moment over the arm (the rear pair runs in disturbed flow).
    """
    lift, drag = lift_drag_forces(model, condition, atmosphere, geometry,
                                  quad_drag_fit, check_domain)
    side, mx, mz = lateral_wrench(model, condition, atmosphere, geometry,
                                  check_domain)
    my = pitching_moment(model, condition, atmosphere, geometry, check_domain)

    aero = wind_to_body(lift, drag, side, condition.alpha_deg)
    fx, fy, fz = aero.fx, aero.fy, aero.fz

    if condition.esc_fwd > 1000.0:
        fx += thrust_map.thrust(prop_alpha(condition.alpha_deg, PropModule.FORWARD),
                                condition.airspeed, condition.esc_fwd)
    if condition.esc_quad > 1000.0 and condition.mode is not FlightMode.PLANE:
        t_each = thrust_map.thrust(
            prop_alpha(condition.alpha_deg, PropModule.VERTICAL),
            condition.airspeed, condition.esc_quad)
        t_vert = 4.0 * t_each
        if condition.airspeed > 0:
            # rear-pair deficit implied by the modeled pitching moment
            t_vert -= 2.0 * my / geometry.quad_arm
        fz -= t_vert

    return ForcesMoments(frame="body", fx=fx, fy=fy, fz=fz, mx=mx, my=my, mz=mz)
