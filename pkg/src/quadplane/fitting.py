"""Least-squares polynomial fitting and model-regeneration pipelines.

``polyfit`` wraps an orthogonal-decomposition least-squares solve on a
rescaled abscissa (raw ESC pulse widths cubed reach ~8e9, which would strain
normal equations in double precision); coefficients are expanded back to the
power basis. Goodness-of-fit conventions used everywhere:

* r^2 = 1 - SS_res/SS_tot with SS_tot about the mean; defined as 1 on
  constant data fit exactly, 0 otherwise,
* rmse = sqrt(SS_res / n) (population form, no dof correction).

The suite pipeline consumes flat lists of :class:`SuitePoint` samples (one
observed coefficient value per row) and regenerates the full aerodynamic
model; :func:`fit_thrust_table` does the same for the propulsion map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .aero import (ALPHA_DOMAIN, BUCKETS, DEFAULT_STALL_BOUNDARY, AeroModel,
                   DiffThrustMomentFit, DragFit, ElevatorMomentFit, FitMeta,
                   LateralModel, LiftFit, PitchMomentFit, QuadDragFit)
from .core import (DEFAULT_KINEMATIC_VISCOSITY, FlightMode, reynolds)
from .exceptions import DomainError, SingularFitError
from .propulsion import ALPHA_BAND_HIGH, ALPHA_BAND_LOW, VA_GRID, ThrustMap


@dataclass(frozen=True)
class FitResult:
    """Polynomial least-squares fit with goodness-of-fit statistics."""

    coefficients: tuple[float, ...]  # ascending degree
    r_squared: float
    rmse: float
    n_points: int
    degree: int
    through_origin: bool = False

    def value(self, x: float) -> float:
        out = 0.0
        for c in reversed(self.coefficients):
            out = out * x + c
        return out


def _stats(ys: np.ndarray, predicted: np.ndarray) -> tuple[float, float]:
    resid = ys - predicted
    ss_res = float(resid @ resid)
    centered = ys - ys.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return r2, math.sqrt(ss_res / len(ys))


def polyfit(xs, ys, degree: int) -> FitResult:
    """Ordinary least-squares polynomial fit of the given degree (1..3)."""
    if degree not in (1, 2, 3):
        raise DomainError("degree must be 1, 2 or 3")
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DomainError("xs and ys must be equal-length 1-D sequences")
    n = len(xs)
    if n < degree + 1:
        raise SingularFitError(f"need at least {degree + 1} points, got {n}")
    if len(np.unique(xs)) < degree + 1:
        raise SingularFitError("too few distinct abscissa values for the degree")
    # fit in a mapped [-1, 1] domain for conditioning, expand to power basis
    series, info = np.polynomial.Polynomial.fit(xs, ys, degree, full=True)
    rank = int(info[1])
    if rank < degree + 1:
        raise SingularFitError("rank-deficient design matrix")
    coeffs = series.convert().coef
    coeffs = np.pad(coeffs, (0, degree + 1 - len(coeffs)))
    predicted = np.polynomial.polynomial.polyval(xs, coeffs)
    r2, rmse = _stats(ys, predicted)
    return FitResult(coefficients=tuple(float(c) for c in coeffs),
                     r_squared=r2, rmse=rmse, n_points=n, degree=degree)


def fit_proportional(xs, ys) -> FitResult:
    """Zero-intercept linear fit y = m*x (used for control-surface moments)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 1 or not np.any(xs != 0):
        raise SingularFitError("proportional fit needs a nonzero abscissa")
    slope = float((xs @ ys) / (xs @ xs))
    r2, rmse = _stats(ys, slope * xs)
    return FitResult(coefficients=(0.0, slope), r_squared=r2, rmse=rmse,
                     n_points=len(xs), degree=1, through_origin=True)


# -- thrust-map regeneration ---------------------------------------------------


@dataclass
class ThrustFitReport:
    cells: dict[tuple[float, float], FitResult] = field(default_factory=dict)
    errors: dict[tuple[float, float], str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        expected = {(a, v) for a in ALPHA_BAND_LOW + ALPHA_BAND_HIGH for v in VA_GRID}
        return set(self.cells) == expected

    def to_dict(self) -> dict:
        return {
            "cells": [
                {"alpha_p_deg": a, "airspeed_mps": v,
                 "coefficients": list(fit.coefficients),
                 "r2": fit.r_squared, "rmse": fit.rmse, "n": fit.n_points}
                for (a, v), fit in sorted(self.cells.items())
            ],
            "errors": [
                {"alpha_p_deg": a, "airspeed_mps": v, "error": msg}
                for (a, v), msg in sorted(self.errors.items())
            ],
        }


def fit_thrust_table(samples) -> tuple[ThrustMap | None, ThrustFitReport]:
    """Refit the dynamic-thrust map from (alpha_p, airspeed, esc, thrust) rows.

    Each grid cell needs at least 4 distinct ESC settings for its cubic.
    Cells with insufficient data are reported and skipped; the map is only
    assembled when all cells fitted.
    """
    cells: dict[tuple[float, float], list[tuple[float, float]]] = {}
    for alpha_p, va, nu, thrust in samples:
        cells.setdefault((float(alpha_p), float(va)), []).append((nu, thrust))

    report = ThrustFitReport()
    from .propulsion import CubicThrustCurve  # local import avoids cycle at module load

    curves = {}
    for key, pts in sorted(cells.items()):
        nus = [p[0] for p in pts]
        ts = [p[1] for p in pts]
        try:
            fit = polyfit(nus, ts, 3)
        except SingularFitError as exc:
            report.errors[key] = str(exc)
            continue
        report.cells[key] = fit
        c0, c1, c2, c3 = fit.coefficients
        curves[key] = CubicThrustCurve(c0=c0, c1=c1, c2=c2, c3=c3,
                                       r_squared=fit.r_squared, rmse=fit.rmse)

    if not report.complete:
        expected = {(a, v) for a in ALPHA_BAND_LOW + ALPHA_BAND_HIGH for v in VA_GRID}
        for key in sorted(expected - set(report.cells)):
            report.errors.setdefault(key, "no samples for this grid cell")
        return None, report
    return ThrustMap(curves=curves), report


def sample_thrust_map(thrust_map: ThrustMap,
                      esc_grid=(1000.0, 1250.0, 1550.0, 1750.0, 2000.0)):
    """Noise-free synthetic samples of every thrust-map cell."""
    out = []
    for (alpha_p, va), curve in sorted(thrust_map.curves.items()):
        for nu in esc_grid:
            out.append((alpha_p, va, nu, curve._eval(nu)))
    return out


# -- aerodynamic suite regeneration ---------------------------------------------

# sample kinds; x is alpha (deg) unless stated otherwise
KIND_LIFT = "lift"
KIND_DRAG = "drag"
KIND_FORM_DRAG = "form_drag"
KIND_QUAD_DRAG = "quad_drag"                     # physical samples, both forms fit
KIND_QUAD_DRAG_LINEAR = "quad_drag_linear"       # synthetic, linear-form source
KIND_QUAD_DRAG_QUADRATIC = "quad_drag_quadratic"
KIND_PITCH = "pitch_moment"
KIND_ELEVATOR = "pitch_elevator"                 # x is elevator deflection
KIND_DIFF_THRUST = "diff_thrust"
KIND_ROLL_AILERON = "roll_aileron"               # x is aileron deflection
KIND_ROLL_RUDDER = "roll_rudder"                 # x is rudder deflection
KIND_YAW_AILERON = "yaw_aileron"
KIND_YAW_RUDDER = "yaw_rudder"
KIND_SIDE_FORCE = "side_force"                   # x is rudder deflection


@dataclass(frozen=True)
class SuitePoint:
    """One observed coefficient/moment sample for the suite fitter."""

    kind: str
    bucket: int
    x: float
    value: float
    mode: FlightMode | None = None


@dataclass
class SuiteFitReport:
    fits: list[dict] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def record(self, kind: str, bucket: int, mode: FlightMode | None,
               fit: FitResult, domain: tuple[float, float]) -> None:
        self.fits.append({
            "kind": kind, "mode": mode.value if mode else None,
            "airspeed_mps": bucket, "coefficients": list(fit.coefficients),
            "r2": fit.r_squared, "rmse": fit.rmse, "n": fit.n_points,
            "domain": list(domain),
        })

    def to_dict(self) -> dict:
        return {"fits": self.fits, "missing": self.missing, "warnings": self.warnings}


def sample_suite(model: AeroModel,
                 deflections=(-0.8, -0.4, 0.4, 0.8)) -> list[SuitePoint]:
    """Noise-free samples of every fitted family, drawn on each fit's own
    domain so a refit reproduces the source model exactly."""
    pts: list[SuitePoint] = []
    for b in model.buckets:
        stall = model.stall_boundary[b]
        lift_grid = [a for a in (-5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0) if a <= stall]
        alpha_grid = (-5.0, 0.0, 5.0, 10.0)
        for mode in (FlightMode.QUAD, FlightMode.HYBRID, FlightMode.PLANE):
            for a in lift_grid:
                pts.append(SuitePoint(KIND_LIFT, b, a, model.lift[(mode, b)].value(a), mode))
            for a in alpha_grid:
                pts.append(SuitePoint(KIND_DRAG, b, a, model.drag[(mode, b)].value(a), mode))
        for a in alpha_grid:
            pts.append(SuitePoint(KIND_FORM_DRAG, b, a, model.form_drag[b].value(a)))
            pts.append(SuitePoint(KIND_PITCH, b, a, model.pitch[b].value(a)))
        for mode in (FlightMode.QUAD, FlightMode.HYBRID):
            for a in alpha_grid:
                pts.append(SuitePoint(KIND_QUAD_DRAG_LINEAR, b, a,
                                      model.quad_drag[(mode, b, "linear")].value(a), mode))
                pts.append(SuitePoint(KIND_QUAD_DRAG_QUADRATIC, b, a,
                                      model.quad_drag[(mode, b, "quadratic")].value(a), mode))
                pts.append(SuitePoint(KIND_DIFF_THRUST, b, a,
                                      model.diff_thrust[(mode, b)].value(a), mode))
        lat = model.lateral[b]
        for d in deflections:
            pts.append(SuitePoint(KIND_ELEVATOR, b, d, model.pitch_elevator[b].value(d)))
            pts.append(SuitePoint(KIND_ROLL_AILERON, b, d, lat.c_rm_da * d))
            pts.append(SuitePoint(KIND_ROLL_RUDDER, b, d, lat.c_rm_dr * d))
            pts.append(SuitePoint(KIND_YAW_AILERON, b, d, lat.c_ym_da * d))
            pts.append(SuitePoint(KIND_YAW_RUDDER, b, d, lat.c_ym_dr * d))
        for d in (0.0,) + tuple(deflections):
            pts.append(SuitePoint(KIND_SIDE_FORCE, b, d, lat.side_force_coefficient(d)))
    return pts


def _meta(mode: FlightMode | None, bucket: int, fit: FitResult,
          chord: float = 0.1524) -> FitMeta:
    return FitMeta(mode=mode, airspeed=bucket,
                   reynolds=reynolds(bucket, chord, DEFAULT_KINEMATIC_VISCOSITY),
                   r_squared=fit.r_squared, rmse=fit.rmse)


def fit_aero_suite(points: list[SuitePoint],
                   stall_boundary: dict[int, float] | None = None,
                   ) -> tuple[AeroModel | None, SuiteFitReport]:
    """Regenerate the coefficient suite from raw samples.

    Lift samples beyond the per-bucket stall boundary are filtered before
    fitting; other families use the full tested alpha range. Buckets with
    insufficient data are reported and omitted; the model is built only when
    every (mode, bucket) cell fitted.
    """
    stall = dict(stall_boundary or DEFAULT_STALL_BOUNDARY)
    report = SuiteFitReport()
    groups: dict[tuple, list[SuitePoint]] = {}
    for p in points:
        groups.setdefault((p.kind, p.mode, p.bucket), []).append(p)

    def data(kind, mode, bucket, alpha_filter=None):
        pts = groups.get((kind, mode, bucket), [])
        if alpha_filter is not None:
            kept = [p for p in pts if alpha_filter[0] - 1e-9 <= p.x <= alpha_filter[1] + 1e-9]
            if len(kept) != len(pts):
                report.warnings.append(
                    f"{kind} ({getattr(mode, 'value', None)}, {bucket}): "
                    f"{len(pts) - len(kept)} samples outside {alpha_filter} excluded")
            pts = kept
        return [p.x for p in pts], [p.value for p in pts]

    def try_fit(label, fitter, *args):
        try:
            return fitter(*args)
        except SingularFitError as exc:
            report.missing.append(f"{label}: {exc}")
            return None

    lift, drag, form_drag, quad_drag = {}, {}, {}, {}
    pitch, elevator, diff_thrust, lateral = {}, {}, {}, {}

    for b in BUCKETS:
        for mode in (FlightMode.QUAD, FlightMode.HYBRID, FlightMode.PLANE):
            xs, ys = data(KIND_LIFT, mode, b, (ALPHA_DOMAIN[0], stall[b]))
            fit = try_fit(f"lift ({mode.value}, {b})", polyfit, xs, ys, 1)
            if fit:
                report.record(KIND_LIFT, b, mode, fit, (ALPHA_DOMAIN[0], stall[b]))
                lift[(mode, b)] = LiftFit(*fit.coefficients, meta=_meta(mode, b, fit))
            xs, ys = data(KIND_DRAG, mode, b, ALPHA_DOMAIN)
            fit = try_fit(f"drag ({mode.value}, {b})", polyfit, xs, ys, 2)
            if fit:
                report.record(KIND_DRAG, b, mode, fit, ALPHA_DOMAIN)
                drag[(mode, b)] = DragFit(*fit.coefficients, meta=_meta(mode, b, fit))

        xs, ys = data(KIND_FORM_DRAG, None, b, ALPHA_DOMAIN)
        fit = try_fit(f"form_drag ({b})", polyfit, xs, ys, 2)
        if fit:
            report.record(KIND_FORM_DRAG, b, None, fit, ALPHA_DOMAIN)
            form_drag[b] = DragFit(*fit.coefficients, meta=_meta(None, b, fit))

        xs, ys = data(KIND_PITCH, None, b, ALPHA_DOMAIN)
        fit = try_fit(f"pitch_moment ({b})", polyfit, xs, ys, 1)
        if fit:
            report.record(KIND_PITCH, b, None, fit, ALPHA_DOMAIN)
            pitch[b] = PitchMomentFit(*fit.coefficients, meta=_meta(None, b, fit))

        xs, ys = data(KIND_ELEVATOR, None, b)
        fit = try_fit(f"pitch_elevator ({b})", fit_proportional, xs, ys)
        if fit:
            report.record(KIND_ELEVATOR, b, None, fit, (-1.0, 1.0))
            elevator[b] = ElevatorMomentFit(fit.coefficients[1], meta=_meta(None, b, fit))

        for mode in (FlightMode.QUAD, FlightMode.HYBRID):
            for form, kind, deg in (("linear", KIND_QUAD_DRAG_LINEAR, 1),
                                    ("quadratic", KIND_QUAD_DRAG_QUADRATIC, 2)):
                xs, ys = data(kind, mode, b, ALPHA_DOMAIN)
                xs2, ys2 = data(KIND_QUAD_DRAG, mode, b, ALPHA_DOMAIN)
                xs, ys = list(xs) + list(xs2), list(ys) + list(ys2)
                fit = try_fit(f"quad_drag {form} ({mode.value}, {b})", polyfit, xs, ys, deg)
                if fit:
                    report.record(f"quad_drag_{form}", b, mode, fit, ALPHA_DOMAIN)
                    c = fit.coefficients
                    quad_drag[(mode, b, form)] = QuadDragFit(
                        c0=c[0], c_alpha=c[1],
                        c_alpha2=c[2] if deg == 2 else None,
                        form=form, meta=_meta(mode, b, fit))
            xs, ys = data(KIND_DIFF_THRUST, mode, b, ALPHA_DOMAIN)
            fit = try_fit(f"diff_thrust ({mode.value}, {b})", polyfit, xs, ys, 2)
            if fit:
                report.record(KIND_DIFF_THRUST, b, mode, fit, ALPHA_DOMAIN)
                diff_thrust[(mode, b)] = DiffThrustMomentFit(
                    *fit.coefficients, meta=_meta(mode, b, fit))

        parts = {}
        for name, kind in (("rm_da", KIND_ROLL_AILERON), ("rm_dr", KIND_ROLL_RUDDER),
                           ("ym_da", KIND_YAW_AILERON), ("ym_dr", KIND_YAW_RUDDER)):
            xs, ys = data(kind, None, b)
            fit = try_fit(f"{kind} ({b})", fit_proportional, xs, ys)
            if fit:
                report.record(kind, b, None, fit, (-1.0, 1.0))
                parts[name] = fit
        xs, ys = data(KIND_SIDE_FORCE, None, b)
        fit = try_fit(f"side_force ({b})", polyfit, xs, ys, 1)
        if fit:
            report.record(KIND_SIDE_FORCE, b, None, fit, (-1.0, 1.0))
            parts["sf"] = fit
        if len(parts) == 5:
            lateral[b] = LateralModel(
                c_rm_da=parts["rm_da"].coefficients[1],
                c_rm_dr=parts["rm_dr"].coefficients[1],
                c_ym_da=parts["ym_da"].coefficients[1],
                c_ym_dr=parts["ym_dr"].coefficients[1],
                c_sf0=parts["sf"].coefficients[0],
                c_sf_dr=parts["sf"].coefficients[1],
                meta=_meta(None, b, parts["sf"]))

    complete = (
        len(lift) == 9 and len(drag) == 9 and len(form_drag) == 3
        and len(quad_drag) == 12 and len(pitch) == 3 and len(elevator) == 3
        and len(diff_thrust) == 6 and len(lateral) == 3
    )
    if not complete:
        return None, report
    model = AeroModel(lift=lift, drag=drag, form_drag=form_drag,
                      quad_drag=quad_drag, pitch=pitch, pitch_elevator=elevator,
                      diff_thrust=diff_thrust, lateral=lateral,
                      stall_boundary=stall)
    return model, report
