"""Forward simulation of tunnel logs from fitted models.

Used to validate the reduction pipeline by round trip: synthesize the load
-cell record a run would produce if the fitted models were exact, push it
through segmentation and reduction, and compare. Optional Gaussian noise is
injected on the three force channels only (its magnitude is specified in
newtons); moments stay exact.
"""

from __future__ import annotations

import io

import numpy as np

from .aero import AeroModel, total_wrench
from .core import Atmosphere, FlightCondition, ForcesMoments, VehicleGeometry
from .datared import CSV_COLUMNS, LogRecord, ScheduleStep, TestSchedule
from .propulsion import ThrustMap


def step_condition(step: ScheduleStep, alpha_deg: float, airspeed: float) -> FlightCondition:
    da, de, dr = step.deflections
    return FlightCondition(
        mode=step.mode(), alpha_deg=alpha_deg, airspeed=airspeed,
        esc_fwd=step.nu_fwd, esc_quad=step.nu_quad,
        aileron=da, elevator=de, rudder=dr)


def step_wrench(model: AeroModel, thrust_map: ThrustMap, step: ScheduleStep,
                alpha_deg: float, airspeed: float, atmosphere: Atmosphere,
                geometry: VehicleGeometry) -> ForcesMoments:
    # domain checks off: synthetic logs cover the full tested grid, including
    # points beyond the low-speed stall boundary
    return total_wrench(model, thrust_map,
                        step_condition(step, alpha_deg, airspeed),
                        atmosphere, geometry, check_domain=False)


def simulate_records(model: AeroModel, thrust_map: ThrustMap,
                     geometry: VehicleGeometry, atmosphere: Atmosphere,
                     schedule: TestSchedule, alpha_deg: float, airspeed: float,
                     rate_hz: float = 50.0, noise_sigma: float = 0.0,
                     seed: int | None = None, temp_c: float = 22.0) -> list[LogRecord]:
    """Synthesize one run's load-cell log at the given sample rate."""
    rng = np.random.default_rng(seed)
    dt = 1.0 / rate_hz
    records: list[LogRecord] = []
    t = dt
    for start, end, step in schedule.bounds():
        w = step_wrench(model, thrust_map, step, alpha_deg, airspeed,
                        atmosphere, geometry)
        da, de, dr = step.deflections
        ts = []
        while t <= end + 1e-9:
            ts.append(t)
            t += dt
        n = len(ts)
        if noise_sigma > 0:
            noise = rng.normal(0.0, noise_sigma, size=(n, 3))
        else:
            noise = np.zeros((n, 3))
        for i, ti in enumerate(ts):
            records.append(LogRecord(
                t=round(ti, 9),
                fx=float(w.fx + noise[i, 0]), fy=float(w.fy + noise[i, 1]),
                fz=float(w.fz + noise[i, 2]),
                mx=w.mx, my=w.my, mz=w.mz,
                nu_quad=step.nu_quad, nu_fwd=step.nu_fwd,
                da=da, de=de, dr=dr, va=float(airspeed), temp_c=temp_c))
    return records


def records_to_csv(records: list[LogRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        buf.write(",".join(repr(v) for v in (
            r.t, r.fx, r.fy, r.fz, r.mx, r.my, r.mz,
            r.nu_quad, r.nu_fwd, r.da, r.de, r.dr, r.va, r.temp_c)) + "\n")
    return buf.getvalue()
