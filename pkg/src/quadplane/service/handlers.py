"""Request handlers: all service/CLI logic in plain functions.

The FastAPI app and the command-line client both call these with a loaded
:class:`~quadplane.db.CoefficientDatabase`; the CLI can also ship the same
request models to a remote service, so behavior is identical either way.
"""

from __future__ import annotations

import io

from .. import datared, fitting, trimsim
from ..aero import dynamic_pressure_area
from ..core import (FlightCondition, FlightMode, PropModule, prop_alpha,
                    reynolds, wind_to_body)
from ..db import CoefficientDatabase, database_from_models
from ..exceptions import EnvelopeError
from ..meshlut import CoefficientInterpolator, build_mesh
from . import schemas as s


def handle_info(db: CoefficientDatabase) -> s.InfoResponse:
    return s.InfoResponse(
        name=db.name, provenance=db.provenance,
        table_checksum=db.table_checksum(), warnings=db.warnings,
        mass_kg=db.geometry.mass, weight_N=db.geometry.weight,
        wing_area_m2=db.geometry.planform_area)


def handle_thrust(db: CoefficientDatabase, req: s.ThrustRequest) -> s.ThrustResponse:
    q = db.thrust_map.thrust_ex(req.alpha_p_deg, req.airspeed_mps, req.esc_us)
    return s.ThrustResponse(thrust_N=q.thrust, clamped_alpha=q.clamped_alpha,
                            clamped_airspeed=q.clamped_airspeed)


def handle_eval(db: CoefficientDatabase, req: s.EvalRequest) -> s.EvalResponse:
    model, geom, atm = db.aero_model, db.geometry, db.atmosphere
    cond = FlightCondition(mode=req.mode, alpha_deg=req.alpha_deg,
                           airspeed=req.airspeed_mps, esc_fwd=req.esc_fwd_us,
                           esc_quad=req.esc_quad_us, aileron=req.aileron,
                           elevator=req.elevator, rudder=req.rudder)
    v, alpha = cond.airspeed, cond.alpha_deg
    flags: list[str] = []
    coeffs = None
    bucket: int | None = None

    lift = drag = side = mx = my = mz = 0.0
    if v > 0:
        use_interp = req.interp
        if not use_interp:
            try:
                bucket = model.bucket_for(v)
            except EnvelopeError:
                use_interp = True
                flags.append("airspeed off-bucket; mesh interpolation used")
        if use_interp:
            interp = CoefficientInterpolator(model, cond.mode)
            cl = interp.c_lift(alpha, v)
            cdp = interp.c_drag_plane(alpha, v)
            cdq = interp.c_drag_quad(alpha, v)
            cm_structural = interp.c_pitch(alpha, v)
            mdt = interp.diff_thrust_moment(alpha, v)
            c_de = interp.c_elevator(v)
            lat = interp.lateral_at(v)
            c_form = None
            flags.append("mesh-interpolated coefficients")
        else:
            model.check_alpha(alpha, bucket, lift_domain=True)
            cl = model.c_lift(cond.mode, bucket, alpha)
            cdp = model.c_drag_plane(cond.mode, bucket, alpha)
            cdq = model.c_quad_drag(cond.mode, bucket, alpha, req.quad_drag_fit)
            cm_structural = model.pitch[bucket].value(alpha)
            mdt = model.diff_thrust_moment(cond.mode, bucket, alpha)
            c_de = model.pitch_elevator[bucket].c_de
            lat = model.lateral[bucket]
            c_form = model.c_form_drag(bucket, alpha)

        qs = dynamic_pressure_area(atm, v, geom)
        qsc = qs * geom.wing_chord
        c_m = cm_structural + c_de * cond.elevator
        c_rm = lat.roll_coefficient(cond.aileron, cond.rudder)
        c_ym = lat.yaw_coefficient(cond.aileron, cond.rudder)
        c_sf = lat.side_force_coefficient(cond.rudder)
        lift, drag = cl * qs, cdq * v + cdp * qs
        side, mx, mz = qs * c_sf, qsc * c_rm, qsc * c_ym
        my = qsc * c_m
        if cond.mode is not FlightMode.PLANE and cond.esc_quad > 1000.0:
            my += mdt
        coeffs = s.Coefficients(c_lift=cl, c_drag_plane=cdp, c_drag_quad=cdq,
                                c_form_drag=c_form, c_moment=c_m,
                                c_side_force=c_sf, c_roll_moment=c_rm,
                                c_yaw_moment=c_ym)
    else:
        flags.append("coefficients undefined at zero airspeed")

    t_fwd = t_vert = 0.0
    if cond.esc_fwd > 1000.0:
        t_fwd = db.thrust_map.thrust(prop_alpha(alpha, PropModule.FORWARD), v,
                                     cond.esc_fwd)
    if cond.esc_quad > 1000.0 and cond.mode is not FlightMode.PLANE:
        t_each = db.thrust_map.thrust(prop_alpha(alpha, PropModule.VERTICAL), v,
                                      cond.esc_quad)
        t_vert = 4.0 * t_each
        if v > 0:
            t_vert -= 2.0 * my / geom.quad_arm

    body = wind_to_body(lift, drag, side, alpha)
    wrench = s.Wrench(frame="body", fx=body.fx + t_fwd, fy=body.fy,
                      fz=body.fz - t_vert, mx=mx, my=my, mz=mz)
    return s.EvalResponse(
        mode=cond.mode.value, alpha_deg=alpha, airspeed_mps=v,
        reynolds=reynolds(v, geom.wing_chord, atm.kinematic_viscosity),
        bucket_mps=bucket, coefficients=coeffs, lift_N=lift, drag_N=drag,
        side_force_N=side, pitch_moment_Nm=my, t_fwd_N=t_fwd, t_vert_N=t_vert,
        wrench=wrench, flags=flags)


def _trim_response(sol: trimsim.TrimSolution) -> s.TrimResponse:
    c = sol.condition
    return s.TrimResponse(
        mode=c.mode.value, alpha_deg=c.alpha_deg, airspeed_mps=c.airspeed,
        esc_fwd_us=c.esc_fwd, esc_quad_us=c.esc_quad, elevator=c.elevator,
        t_fwd_N=sol.t_fwd, t_vert_N=sol.t_vert,
        force_residual_N=sol.force_residual,
        moment_residual_Nm=sol.moment_residual,
        tilt_residual_N=sol.tilt_residual, feasible=sol.feasible,
        constraints=list(sol.constraints), flags=list(sol.flags))


def handle_trim(db: CoefficientDatabase, req: s.TrimRequest) -> s.TrimResponse:
    sol = trimsim.level_trim(req.mode, req.airspeed_mps, db.aero_model,
                             db.thrust_map, db.geometry, db.atmosphere,
                             alpha_deg=req.alpha_deg,
                             pitch_policy=req.pitch_policy, strict=req.strict)
    return _trim_response(sol)


def handle_transition(db: CoefficientDatabase,
                      req: s.TransitionRequest) -> s.TransitionResponse:
    sched = trimsim.transition_schedule(
        req.v_from_mps, req.v_to_mps, req.steps, db.aero_model, db.thrust_map,
        db.geometry, db.atmosphere, alpha_policy_deg=req.alpha_policy_deg,
        pitch_policy=req.pitch_policy)
    return s.TransitionResponse(direction=sched.direction,
                                entries=[_trim_response(e) for e in sched.entries])


def handle_envelope(db: CoefficientDatabase,
                    req: s.EnvelopeRequest) -> s.EnvelopeResponse:
    cells = trimsim.envelope(req.mode, db.aero_model, db.thrust_map,
                             db.geometry, db.atmosphere,
                             alpha_grid=tuple(req.alpha_grid_deg),
                             va_grid=tuple(req.va_grid_mps))
    return s.EnvelopeResponse(cells=[
        s.EnvelopeCellModel(mode=c.mode.value, alpha_deg=c.alpha_deg,
                            airspeed_mps=c.airspeed, feasible=c.feasible,
                            binding=c.binding, margins=c.margins)
        for c in cells
    ])


def handle_mesh(db: CoefficientDatabase, req: s.MeshRequest) -> s.MeshResponse:
    mesh = build_mesh(db.aero_model, req.mode, req.coefficient)
    d = mesh.to_dict()
    return s.MeshResponse(kind=d["kind"], mode=d["mode"],
                          alpha_grid_deg=d["alpha_grid_deg"],
                          airspeed_grid_mps=d["airspeed_grid_mps"],
                          triangles=[s.MeshTriangle(**t) for t in d["triangles"]])


def _point_model(p: datared.ReducedPoint) -> s.ReducedPointModel:
    return s.ReducedPointModel(
        label=p.label, mode=p.mode.value, alpha_deg=p.alpha_deg,
        airspeed_mps=p.airspeed, lift_N=p.lift, drag_N=p.drag,
        side_force_N=p.side_force, mx_Nm=p.mx, my_Nm=p.my, mz_Nm=p.mz,
        sigma_lift_N=p.sigma.get("lift", 0.0), sigma_drag_N=p.sigma.get("drag", 0.0),
        sigma_my_Nm=p.sigma.get("my", 0.0), t_fwd_N=p.t_fwd, t_vert_N=p.t_vert,
        aileron=p.aileron, elevator=p.elevator, rudder=p.rudder, n_samples=p.n,
        c_lift=p.c_lift, c_drag_plane=p.c_drag_plane, c_form_drag=p.c_form_drag,
        c_moment=p.c_moment, flags=list(p.flags))


def handle_reduce(db: CoefficientDatabase, req: s.ReduceRequest) -> s.ReduceResponse:
    parsed = datared.parse_log(io.StringIO(req.csv_text))
    records = parsed.records
    provenance: dict = {"split_moment": req.split_moment}
    if req.offsets:
        for channel, offset in sorted(req.offsets.items()):
            records = datared.apply_offset(records, channel, offset)
        provenance["offsets"] = dict(sorted(req.offsets.items()))
    if req.schedule is not None:
        schedule = datared.TestSchedule.from_rows([r.model_dump() for r in req.schedule])
        provenance["schedule"] = "custom"
    else:
        schedule = datared.default_test_schedule()
        provenance["schedule"] = "default"
    points, warnings = datared.reduce_log(
        records, schedule, req.alpha_deg, req.airspeed_mps, db.thrust_map,
        db.geometry, db.atmosphere, split_moment=req.split_moment)
    warnings = parsed.warnings + warnings
    return s.ReduceResponse(
        points=[_point_model(p) for p in points], warnings=warnings,
        rejected_rows=[f"line {n}: {msg}" for n, msg in parsed.rejected],
        provenance=provenance)


def handle_fit(db: CoefficientDatabase, req: s.FitRequest) -> s.FitResponse:
    warnings: list[str] = []
    thrust_map = None
    thrust_report = None
    if req.thrust_samples:
        thrust_map, report = fitting.fit_thrust_table(
            [tuple(row) for row in req.thrust_samples])
        thrust_report = report.to_dict()
        if thrust_map is None:
            warnings.append("thrust map incomplete; shipped map retained")

    suite_points: list[fitting.SuitePoint] = []
    if req.suite_points:
        for p in req.suite_points:
            suite_points.append(fitting.SuitePoint(
                kind=p.kind, bucket=p.bucket_mps, x=p.x, value=p.value,
                mode=FlightMode.parse(p.mode) if p.mode else None))
    if req.reduced_points:
        reduced = [
            datared.ReducedPoint(
                label=p.label, mode=FlightMode.parse(p.mode),
                alpha_deg=p.alpha_deg, airspeed=p.airspeed_mps, lift=p.lift_N,
                drag=p.drag_N, side_force=p.side_force_N, mx=p.mx_Nm, my=p.my_Nm,
                mz=p.mz_Nm, sigma={}, t_fwd=p.t_fwd_N, t_vert=p.t_vert_N,
                aileron=p.aileron, elevator=p.elevator, rudder=p.rudder,
                n=p.n_samples, c_lift=p.c_lift, c_drag_plane=p.c_drag_plane,
                c_form_drag=p.c_form_drag, c_moment=p.c_moment,
                flags=tuple(p.flags))
            for p in req.reduced_points
        ]
        derived, derive_warnings = datared.derive_suite_points(
            reduced, db.geometry, db.atmosphere)
        suite_points.extend(derived)
        warnings.extend(derive_warnings)

    aero_model = None
    suite_report = None
    if suite_points:
        aero_model, report = fitting.fit_aero_suite(suite_points)
        suite_report = report.to_dict()
        if aero_model is None:
            warnings.append("aero suite incomplete; shipped suite retained")

    database = None
    if thrust_map is not None or aero_model is not None:
        database = database_from_models(
            db.geometry, db.atmosphere,
            thrust_map if thrust_map is not None else db.thrust_map,
            aero_model if aero_model is not None else db.aero_model,
            source=req.source)
    return s.FitResponse(database=database, thrust_report=thrust_report,
                         suite_report=suite_report, warnings=warnings)
