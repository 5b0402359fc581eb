"""Steady-flight trim, envelope sweeps and quasi-static mode transitions.

Balance equations (tunnel convention: flight path horizontal, pitch equals
vehicle alpha), projected on body axes with weight W, lift L, drag D:

    T_fwd + L sin(theta) = D cos(theta) + W sin(theta)
    W cos(theta)        = L cos(theta) + D sin(theta) + T_vert

Given alpha, the hybrid/quad balance is solved exactly for (T_fwd, T_vert).
Plane-mode trim solves the classical lift-equals-weight condition for alpha
and then the thrust and elevator settings; the small vertical component of
the tilted thrust line (D*sin(theta), under a newton at cruise) is not folded
back into the alpha solve and is reported as ``tilt_residual``.

Below 5 m/s no aerodynamic fits exist: forces are linearly faded from zero
at V=0 to their 5 m/s-bucket values. Solutions in that region carry a
``low-speed-blend`` flag; this is a declared modeling extension, not data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .aero import AeroModel, dynamic_pressure_area
from .core import (ESC_IDLE, ESC_MAX, Atmosphere, FlightCondition, FlightMode,
                   PropModule, VehicleGeometry, prop_alpha)
from .exceptions import EnvelopeError, InfeasibleError
from .meshlut import CoefficientInterpolator
from .propulsion import ThrustMap

# Fixed-alpha policy for transition schedules. Zero alpha is not usable as a
# default: the fitted hybrid lift at (0 deg, 5 m/s) is negative, which would
# make the required vertical thrust rise above hover weight mid-transition.
DEFAULT_TRANSITION_ALPHA_DEG = 5.0

BLEND_SPEED = 5.0  # m/s; below this, aero forces fade linearly to zero

FORCE_RESIDUAL_LIMIT = 0.05   # N
MOMENT_RESIDUAL_LIMIT = 0.01  # N*m


@dataclass(frozen=True)
class TrimSolution:
    condition: FlightCondition
    t_fwd: float
    t_vert: float
    force_residual: float     # residual of the solved balance system, N
    moment_residual: float    # N*m
    tilt_residual: float      # unbalanced body-z component from thrust tilt, N
    feasible: bool
    constraints: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.feasible and (self.force_residual >= FORCE_RESIDUAL_LIMIT
                              or self.moment_residual >= MOMENT_RESIDUAL_LIMIT):
            raise InfeasibleError("solution marked feasible with residuals above limits")


@dataclass(frozen=True)
class TransitionSchedule:
    direction: str  # "accelerate" (quad->plane) or "decelerate"
    entries: tuple[TrimSolution, ...]

    def airspeeds(self) -> list[float]:
        return [e.condition.airspeed for e in self.entries]

    def vertical_thrusts(self) -> list[float]:
        return [e.t_vert for e in self.entries]


class _ForceEvaluator:
    """Aero forces/moments at arbitrary (alpha, V) with low-speed blending."""

    def __init__(self, model: AeroModel, mode: FlightMode, atmosphere: Atmosphere,
                 geometry: VehicleGeometry, quad_drag_fit: str = "linear"):
        self.model = model
        self.mode = mode
        self.atm = atmosphere
        self.geom = geometry
        self.quad_drag_fit = quad_drag_fit
        self.interp = CoefficientInterpolator(model, mode)

    def stall_boundary_at(self, va: float) -> float:
        buckets = self.model.buckets
        va = min(max(va, buckets[0]), buckets[-1])
        if va <= buckets[1]:
            lo, hi = buckets[0], buckets[1]
        else:
            lo, hi = buckets[1], buckets[2]
        t = (va - lo) / (hi - lo)
        return (1 - t) * self.model.stall_boundary[lo] + t * self.model.stall_boundary[hi]

    def _coeffs(self, alpha: float, va: float) -> tuple[float, float, float, float, float]:
        """(c_lift, c_drag_plane, c_drag_quad, c_pitch, mdt) at a bucket or
        interpolated airspeed >= 5 m/s."""
        try:
            b = self.model.bucket_for(va)
            on_bucket = abs(va - b) < 1e-9
        except EnvelopeError:
            on_bucket = False
        if on_bucket:
            cl = self.model.c_lift(self.mode, b, alpha, check_domain=False)
            cdp = self.model.c_drag_plane(self.mode, b, alpha, check_domain=False)
            cdq = self.model.c_quad_drag(self.mode, b, alpha, self.quad_drag_fit,
                                         check_domain=False)
            cm = self.model.c_moment(b, alpha, 0.0, check_domain=False)
            mdt = self.model.diff_thrust_moment(self.mode, b, alpha, check_domain=False)
        else:
            cl = self.interp.c_lift(alpha, va)
            cdp = self.interp.c_drag_plane(alpha, va)
            cdq = self.interp.c_drag_quad(alpha, va)
            cm = self.interp.c_pitch(alpha, va)
            mdt = self.interp.diff_thrust_moment(alpha, va)
        return cl, cdp, cdq, cm, mdt

    def forces(self, alpha: float, va: float) -> tuple[float, float, float, float, list[str]]:
        """(lift N, drag N, structural pitch moment N*m, diff-thrust moment
        N*m, flags)."""
        flags: list[str] = []
        if va <= 0:
            return 0.0, 0.0, 0.0, 0.0, flags
        if va < BLEND_SPEED:
            factor = va / BLEND_SPEED
            l5, d5, m5, mdt5, _ = self.forces(alpha, BLEND_SPEED)
            flags.append("low-speed-blend")
            return factor * l5, factor * d5, factor * m5, factor * mdt5, flags
        cl, cdp, cdq, cm, mdt = self._coeffs(alpha, va)
        qs = dynamic_pressure_area(self.atm, va, self.geom)
        lift = cl * qs
        drag = cdq * va + cdp * qs
        my_structural = qs * self.geom.wing_chord * cm
        return lift, drag, my_structural, mdt, flags

    def lift_coefficient(self, alpha: float, va: float) -> float:
        return self._coeffs(alpha, va)[0]

    def elevator_coefficient(self, va: float) -> float:
        b = self.model.buckets
        return self.interp.c_elevator(min(max(va, b[0]), b[-1]))


def hover_trim(geometry: VehicleGeometry, thrust_map: ThrustMap) -> TrimSolution:
    """Hover: four equal vertical motors carry the weight, forward motor off."""
    per_motor = geometry.weight / 4.0
    from .propulsion import ESC_MONOTONE_MIN
    floor = thrust_map.thrust(90.0, 0.0, ESC_MONOTONE_MIN)
    if per_motor <= floor:
        # below the motor dead-zone floor: command idle, report the remainder
        condition = FlightCondition(mode=FlightMode.QUAD, alpha_deg=0.0, airspeed=0.0)
        return TrimSolution(condition=condition, t_fwd=0.0, t_vert=0.0,
                            force_residual=geometry.weight,
                            moment_residual=0.0, tilt_residual=0.0,
                            feasible=geometry.weight < FORCE_RESIDUAL_LIMIT)
    nu = thrust_map.invert(90.0, 0.0, per_motor)  # raises InfeasibleError if beyond max
    t_vert = 4.0 * thrust_map.thrust(90.0, 0.0, nu)
    condition = FlightCondition(mode=FlightMode.QUAD, alpha_deg=0.0, airspeed=0.0,
                                esc_quad=nu)
    return TrimSolution(condition=condition, t_fwd=0.0, t_vert=t_vert,
                        force_residual=abs(t_vert - geometry.weight),
                        moment_residual=0.0, tilt_residual=0.0, feasible=True)


def _solve_plane_alpha(ev: _ForceEvaluator, va: float, c_lift_required: float) -> float:
    lo, hi = ev.model.alpha_domain[0], ev.stall_boundary_at(va)
    cl_lo, cl_hi = ev.lift_coefficient(lo, va), ev.lift_coefficient(hi, va)
    if not cl_lo <= c_lift_required <= cl_hi:
        raise InfeasibleError(
            f"required lift coefficient {c_lift_required:.3f} outside the "
            f"pre-stall range [{cl_lo:.3f}, {cl_hi:.3f}] at {va:g} m/s",
            reason="stall",
            detail={"required_c_lift": c_lift_required,
                    "max_c_lift": cl_hi, "stall_alpha_deg": hi})
    for _ in range(80):  # lift is piecewise linear and increasing in alpha
        mid = 0.5 * (lo + hi)
        if ev.lift_coefficient(mid, va) < c_lift_required:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return 0.5 * (lo + hi)


def level_trim(mode: FlightMode | str, airspeed: float, model: AeroModel,
               thrust_map: ThrustMap, geometry: VehicleGeometry,
               atmosphere: Atmosphere, alpha_deg: float | None = None,
               pitch_policy: str = "elevator", strict: bool = True) -> TrimSolution:
    """Steady level flight balance at one airspeed.

    Plane mode solves alpha for lift = weight, then forward thrust and the
    elevator; hybrid mode holds the given alpha (default 0) and solves the
    two thrust groups exactly, balancing pitch with the elevator and, if it
    saturates, differential vertical thrust. With ``strict=False`` actuator
    -limit violations return an infeasible-flagged solution instead of
    raising (domain impossibilities such as the stall bound always raise).
    """
    mode = FlightMode.parse(mode)
    W = geometry.weight

    if mode is FlightMode.QUAD:
        if airspeed == 0:
            return hover_trim(geometry, thrust_map)
        raise InfeasibleError(
            "quad mode has no forward-thrust authority; nonzero-airspeed trim "
            "requires hybrid or plane mode", reason="no-forward-thrust")

    ev = _ForceEvaluator(model, mode, atmosphere, geometry)
    constraints: list[str] = []
    feasible = True

    if mode is FlightMode.PLANE:
        if airspeed <= 0:
            raise InfeasibleError("no lift at zero airspeed in plane mode",
                                  reason="no-lift")
        qs = dynamic_pressure_area(atmosphere, airspeed, geometry)
        alpha = _solve_plane_alpha(ev, airspeed, W / qs)
        lift, drag, my_structural, _, flags = ev.forces(alpha, airspeed)
        theta = math.radians(alpha)
        t_fwd = drag * math.cos(theta) + (W - lift) * math.sin(theta)
        t_vert = 0.0
        tilt_residual = (W - lift) * math.cos(theta) - drag * math.sin(theta)
        force_residual = abs(lift - W)
        mdt = 0.0
    else:
        alpha = 0.0 if alpha_deg is None else alpha_deg
        lift, drag, my_structural, mdt, flags = ev.forces(alpha, airspeed)
        theta = math.radians(alpha)
        t_fwd = drag * math.cos(theta) + (W - lift) * math.sin(theta)
        t_vert = (W - lift) * math.cos(theta) - drag * math.sin(theta)
        tilt_residual = 0.0
        force_residual = 0.0
        if t_vert < -1e-9:
            raise InfeasibleError(
                f"vertical thrust {t_vert:.2f} N would need to pull downward; "
                "use plane mode at this speed", reason="negative-vertical-thrust")
        t_vert = max(t_vert, 0.0)

    # actuator solves
    nu_fwd, nu_quad = ESC_IDLE, ESC_IDLE
    if t_fwd > 0:
        try:
            nu_fwd = thrust_map.invert(prop_alpha(alpha, PropModule.FORWARD),
                                       airspeed, t_fwd)
        except InfeasibleError as exc:
            msg = (f"forward thrust {t_fwd:.2f} N exceeds "
                   f"{exc.detail.get('achievable_max_N', float('nan')):.2f} N available")
            if strict:
                raise InfeasibleError(msg, reason="thrust", detail=exc.detail)
            constraints.append("fwd-thrust-saturated")
            feasible = False
            nu_fwd = ESC_MAX
    if t_vert > 0:
        try:
            nu_quad = thrust_map.invert(prop_alpha(alpha, PropModule.VERTICAL),
                                        airspeed, t_vert / 4.0)
        except InfeasibleError as exc:
            if strict:
                raise InfeasibleError(
                    f"per-motor vertical thrust {t_vert / 4.0:.2f} N not achievable",
                    reason="thrust", detail=exc.detail)
            constraints.append("vert-thrust-saturated")
            feasible = False
            nu_quad = ESC_MAX

    # pitch balance: structural + elevator (+ differential-thrust moment)
    qsc = dynamic_pressure_area(atmosphere, airspeed, geometry) * geometry.wing_chord
    c_de = ev.elevator_coefficient(airspeed)
    blend = min(airspeed / BLEND_SPEED, 1.0)
    if airspeed < BLEND_SPEED:
        qsc = dynamic_pressure_area(atmosphere, BLEND_SPEED, geometry) \
            * geometry.wing_chord * blend
    moment_residual = 0.0
    elevator = 0.0
    if qsc > 0:
        elevator = -(my_structural + mdt) / (qsc * c_de)
        if abs(elevator) > 1.0:
            leftover = (my_structural + mdt) + qsc * c_de * math.copysign(1.0, elevator)
            elevator = math.copysign(1.0, elevator)
            if mode is FlightMode.HYBRID and pitch_policy == "elevator":
                delta_t = abs(leftover) / (4.0 * geometry.quad_arm)
                constraints.append(
                    f"elevator-saturated; differential vertical thrust "
                    f"{delta_t:.2f} N per motor balances the remainder")
            else:
                moment_residual = abs(leftover)
                constraints.append("pitch-authority-exceeded")
                feasible = False

    mode_for_condition = mode
    if mode is FlightMode.HYBRID and t_vert == 0.0:
        nu_quad = ESC_IDLE
    condition = FlightCondition(
        mode=mode_for_condition, alpha_deg=alpha, airspeed=airspeed,
        esc_fwd=nu_fwd if mode is not FlightMode.QUAD else ESC_IDLE,
        esc_quad=nu_quad if mode is not FlightMode.PLANE else ESC_IDLE,
        elevator=elevator)
    return TrimSolution(condition=condition, t_fwd=t_fwd, t_vert=t_vert,
                        force_residual=force_residual,
                        moment_residual=moment_residual,
                        tilt_residual=tilt_residual, feasible=feasible,
                        constraints=tuple(constraints), flags=tuple(flags))


def transition_schedule(v_from: float, v_to: float, steps: int, model: AeroModel,
                        thrust_map: ThrustMap, geometry: VehicleGeometry,
                        atmosphere: Atmosphere,
                        alpha_policy_deg: float = DEFAULT_TRANSITION_ALPHA_DEG,
                        pitch_policy: str = "elevator") -> TransitionSchedule:
    """Quasi-static trim ladder between two airspeeds.

    Each step is an independent steady trim at fixed alpha (the vehicle is
    assumed to accelerate slowly through the corridor). Infeasible steps are
    flagged in place; the schedule is always returned.
    """
    if steps < 1:
        raise InfeasibleError("schedule needs at least one step", reason="bad-request")
    if v_from == v_to:
        speeds = [float(v_from)]
    else:
        speeds = [v_from + (v_to - v_from) * i / (steps - 1) for i in range(steps)]
    entries = []
    for v in speeds:
        if v <= 0:
            entries.append(hover_trim(geometry, thrust_map))
            continue
        try:
            sol = level_trim(FlightMode.HYBRID, v, model, thrust_map, geometry,
                             atmosphere, alpha_deg=alpha_policy_deg,
                             pitch_policy=pitch_policy, strict=False)
        except InfeasibleError as exc:
            if exc.reason != "negative-vertical-thrust":
                raise
            # lift exceeds weight at the held alpha: hand over to plane mode
            sol = level_trim(FlightMode.PLANE, v, model, thrust_map, geometry,
                             atmosphere, strict=False)
        if sol.t_vert <= 0.0 and sol.condition.mode is FlightMode.HYBRID:
            sol = level_trim(FlightMode.PLANE, v, model, thrust_map, geometry,
                             atmosphere, strict=False)
        entries.append(sol)
    direction = "accelerate" if v_to >= v_from else "decelerate"
    return TransitionSchedule(direction=direction, entries=tuple(entries))


@dataclass(frozen=True)
class EnvelopeCell:
    mode: FlightMode
    alpha_deg: float
    airspeed: float
    feasible: bool
    binding: str | None
    margins: dict[str, float] = field(default_factory=dict)


def envelope(mode: FlightMode | str, model: AeroModel, thrust_map: ThrustMap,
             geometry: VehicleGeometry, atmosphere: Atmosphere,
             alpha_grid=(-5.0, 0.0, 5.0, 10.0),
             va_grid=(5.0, 11.0, 15.0)) -> list[EnvelopeCell]:
    """Per-(alpha, V) steady-flight feasibility with the binding constraint.

    Hybrid cells solve the exact two-thrust balance; plane cells report the
    vertical assist that holding the cell steadily would require (a plane can
    only trim where that assist vanishes) plus the trim alpha at that speed;
    quad cells are hover-only.
    """
    mode = FlightMode.parse(mode)
    W = geometry.weight
    cells: list[EnvelopeCell] = []

    for va in va_grid:
        alpha_trim = None
        if mode is FlightMode.PLANE and va > 0:
            try:
                alpha_trim = level_trim(mode, va, model, thrust_map, geometry,
                                        atmosphere, strict=False).condition.alpha_deg
            except InfeasibleError:
                alpha_trim = None
        for alpha in alpha_grid:
            if mode is FlightMode.QUAD:
                if va == 0:
                    try:
                        hover_trim(geometry, thrust_map)
                        cells.append(EnvelopeCell(mode, alpha, va, True, None))
                    except InfeasibleError as exc:
                        cells.append(EnvelopeCell(mode, alpha, va, False, exc.reason))
                else:
                    cells.append(EnvelopeCell(mode, alpha, va, False,
                                              "no-forward-thrust"))
                continue

            ev = _ForceEvaluator(model, mode, atmosphere, geometry)
            lift, drag, my_structural, mdt, _ = ev.forces(alpha, va)
            theta = math.radians(alpha)
            t_fwd_req = drag * math.cos(theta) + (W - lift) * math.sin(theta)
            t_vert_req = (W - lift) * math.cos(theta) - drag * math.sin(theta)
            t_fwd_max = thrust_map.max_thrust(prop_alpha(alpha, PropModule.FORWARD), va)
            margins = {
                "t_fwd_required_N": t_fwd_req,
                "t_fwd_margin_N": t_fwd_max - t_fwd_req,
                "t_vert_required_N": t_vert_req,
            }
            qsc = dynamic_pressure_area(atmosphere, max(va, BLEND_SPEED), geometry) \
                * geometry.wing_chord * min(va / BLEND_SPEED, 1.0)
            elev_req = -(my_structural + mdt) / (qsc * ev.elevator_coefficient(va)) \
                if qsc > 0 else 0.0
            margins["elevator_required"] = elev_req

            binding = None
            if mode is FlightMode.PLANE:
                if alpha_trim is not None:
                    margins["alpha_trim_deg"] = alpha_trim
                qs = dynamic_pressure_area(atmosphere, va, geometry)
                cl_needed = W / qs if va > 0 else float("inf")
                cl_stall = ev.lift_coefficient(ev.stall_boundary_at(va), va)
                if cl_needed > cl_stall:
                    binding = "stall"
                elif t_vert_req > FORCE_RESIDUAL_LIMIT:
                    binding = "lift-deficit"
                elif t_vert_req < -FORCE_RESIDUAL_LIMIT:
                    binding = "excess-lift"
            else:
                t_vert_max = 4.0 * thrust_map.max_thrust(
                    prop_alpha(alpha, PropModule.VERTICAL), va)
                margins["t_vert_margin_N"] = t_vert_max - max(t_vert_req, 0.0)
                if t_vert_req < -FORCE_RESIDUAL_LIMIT:
                    binding = "excess-lift"
                elif t_vert_req > t_vert_max:
                    binding = "vert-thrust"
            if binding is None and t_fwd_req > t_fwd_max:
                binding = "fwd-thrust"
            if binding is None and abs(elev_req) > 1.0:
                if mode is FlightMode.HYBRID:
                    margins["differential_thrust_fallback_N"] = \
                        abs((my_structural + mdt)) / (4.0 * geometry.quad_arm)
                else:
                    binding = "pitch-authority"
            cells.append(EnvelopeCell(mode, alpha, va, binding is None, binding,
                                      margins))
    return cells
