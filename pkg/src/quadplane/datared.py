"""Wind-tunnel log ingestion, segmentation and force/moment reduction.

A tunnel run executes a fixed command schedule at one (alpha, airspeed)
mounting; the load cell streams body-frame forces and moments. Reduction:

1. parse the CSV log (malformed rows are collected, not fatal),
2. cut sampling windows out of the schedule: the last 10 s of the vertical
   -motors-only step, the last 10 s of the final all-motors step, the last
   20 s of the first cruise step, and the last 5 s of every control-surface
   deflection step (flow needs settling time after each command change),
3. per window, subtract propulsion-module dynamic thrust and resolve the
   remainder into wind-frame lift/drag; the rear vertical pair's thrust is
   debited from the observed pitching moment over the arm length.

Modules commanded to idle (1000 us) are treated as force-free: no windmilling
thrust is subtracted for an inactive motor, and the rear-pair moment
correction only applies while the vertical group is powered.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .aero import c_drag_form_from_measurement, dynamic_pressure_area
from .core import (Atmosphere, FlightMode, PropModule, VehicleGeometry,
                   prop_alpha)
from .exceptions import DomainError, FormatError, SequencingError
from .fitting import (KIND_DIFF_THRUST, KIND_DRAG, KIND_ELEVATOR,
                      KIND_FORM_DRAG, KIND_LIFT, KIND_PITCH,
                      KIND_QUAD_DRAG, KIND_ROLL_AILERON, KIND_ROLL_RUDDER,
                      KIND_SIDE_FORCE, KIND_YAW_AILERON, KIND_YAW_RUDDER,
                      SuitePoint)
from .propulsion import ThrustMap

CSV_COLUMNS = ("t_s", "Fx_N", "Fy_N", "Fz_N", "Mx_Nm", "My_Nm", "Mz_Nm",
               "nu_quad_us", "nu_fwd_us", "da", "de", "dr", "Va_mps", "temp_C")

FORCE_CHANNELS = ("fx", "fy", "fz", "mx", "my", "mz")

NOMINAL_RATE_HZ = 1000.0
TEMP_DRIFT_WARN_C = 5.0 / 3.0  # 3 F expressed in C


@dataclass(frozen=True)
class LogRecord:
    t: float
    fx: float
    fy: float
    fz: float
    mx: float
    my: float
    mz: float
    nu_quad: float
    nu_fwd: float
    da: float
    de: float
    dr: float
    va: float
    temp_c: float


@dataclass(frozen=True)
class ScheduleStep:
    """One command step; throttles and deflections in percent as commanded."""

    end_time: float
    quad_throttle: float   # percent 0..100
    fwd_throttle: float    # percent 0..100
    aileron: float         # percent -100..100
    elevator: float
    rudder: float

    @property
    def nu_quad(self) -> float:
        return 1000.0 + 10.0 * self.quad_throttle

    @property
    def nu_fwd(self) -> float:
        return 1000.0 + 10.0 * self.fwd_throttle

    @property
    def deflections(self) -> tuple[float, float, float]:
        return self.aileron / 100.0, self.elevator / 100.0, self.rudder / 100.0

    def mode(self) -> FlightMode:
        if self.quad_throttle > 0 and self.fwd_throttle == 0:
            return FlightMode.QUAD
        if self.quad_throttle > 0:
            return FlightMode.HYBRID
        return FlightMode.PLANE


@dataclass(frozen=True)
class TestSchedule:
    __test__ = False  # not a pytest class, despite the name

    steps: tuple[ScheduleStep, ...]

    def __post_init__(self):
        times = [s.end_time for s in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("schedule end times must be strictly increasing")

    @property
    def duration(self) -> float:
        return self.steps[-1].end_time

    def bounds(self) -> list[tuple[float, float, ScheduleStep]]:
        out, start = [], 0.0
        for step in self.steps:
            out.append((start, step.end_time, step))
            start = step.end_time
        return out

    def step_at(self, t: float) -> ScheduleStep:
        for start, end, step in self.bounds():
            if start <= t < end:
                return step
        return self.steps[-1]

    @classmethod
    def from_rows(cls, rows) -> "TestSchedule":
        return cls(steps=tuple(
            ScheduleStep(end_time=float(r["end_time_s"]),
                         quad_throttle=float(r["quad_throttle_pct"]),
                         fwd_throttle=float(r["fwd_throttle_pct"]),
                         aileron=float(r.get("aileron_pct", 0.0)),
                         elevator=float(r.get("elevator_pct", 0.0)),
                         rudder=float(r.get("rudder_pct", 0.0)))
            for r in rows))

    def to_rows(self) -> list[dict]:
        return [
            {"end_time_s": s.end_time, "quad_throttle_pct": s.quad_throttle,
             "fwd_throttle_pct": s.fwd_throttle, "aileron_pct": s.aileron,
             "elevator_pct": s.elevator, "rudder_pct": s.rudder}
            for s in self.steps
        ]


def default_test_schedule() -> TestSchedule:
    """The full-vehicle command sequence used for every tunnel run."""
    rows = [
        (30, 55, 0, 0, 0, 0),
        (50, 55, 50, 0, 0, 0),
        (70, 55, 75, 0, 0, 0),
        (90, 55, 100, 0, 0, 0),
        (130, 0, 75, 0, 0, 0),
        (140, 0, 75, -80, 0, 0),
        (150, 0, 75, -40, 0, 0),
        (160, 0, 75, 40, 0, 0),
        (170, 0, 75, 80, 0, 0),
        (180, 0, 75, 0, -80, 0),
        (190, 0, 75, 0, -40, 0),
        (200, 0, 75, 0, 40, 0),
        (210, 0, 75, 0, 80, 0),
        (220, 0, 75, 0, 0, -80),
        (230, 0, 75, 0, 0, -40),
        (240, 0, 75, 0, 0, 40),
        (250, 0, 75, 0, 0, 80),
    ]
    return TestSchedule(steps=tuple(
        ScheduleStep(end_time=t, quad_throttle=q, fwd_throttle=f,
                     aileron=a, elevator=e, rudder=r)
        for t, q, f, a, e, r in rows))


# -- parsing --------------------------------------------------------------------


@dataclass
class LogParseResult:
    records: list[LogRecord]
    rejected: list[tuple[int, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def parse_log(source: str | Path | io.TextIOBase) -> LogParseResult:
    """Parse a tunnel log CSV; bad rows are reported with line numbers."""
    if isinstance(source, (str, Path)):
        fh = open(source, newline="")
        close = True
    else:
        fh, close = source, False
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty log file: missing header")
        if tuple(h.strip() for h in header) != CSV_COLUMNS:
            raise FormatError(
                f"unexpected header {header!r}; expected {','.join(CSV_COLUMNS)}")
        records: list[LogRecord] = []
        rejected: list[tuple[int, str]] = []
        last_t = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                rejected.append((lineno, f"expected {len(CSV_COLUMNS)} fields, got {len(row)}"))
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                rejected.append((lineno, str(exc)))
                continue
            if any(math.isnan(v) or math.isinf(v) for v in vals):
                rejected.append((lineno, "non-finite value"))
                continue
            t = vals[0]
            if last_t is not None and t <= last_t:
                raise SequencingError(
                    f"line {lineno}: time {t} not after previous {last_t}")
            last_t = t
            records.append(LogRecord(*vals))
    finally:
        if close:
            fh.close()

    warnings = []
    if len(records) >= 2:
        duration = records[-1].t - records[0].t
        rate = (len(records) - 1) / duration if duration > 0 else float("inf")
        if abs(rate - NOMINAL_RATE_HZ) > 0.10 * NOMINAL_RATE_HZ:
            warnings.append(f"sample rate {rate:.1f} Hz differs from nominal "
                            f"{NOMINAL_RATE_HZ:.0f} Hz by more than 10 %")
        temps = [r.temp_c for r in records]
        drift = max(temps) - min(temps)
        if drift > TEMP_DRIFT_WARN_C:
            warnings.append(f"temperature drift {drift:.2f} C within file exceeds "
                            f"{TEMP_DRIFT_WARN_C:.2f} C; load-cell recalibration advised")
    return LogParseResult(records=records, rejected=rejected, warnings=warnings)


def apply_offset(records: list[LogRecord], channel: str, offset: float) -> list[LogRecord]:
    """Add a constant calibration correction to one force/moment channel."""
    if channel not in FORCE_CHANNELS:
        raise DomainError(f"unknown channel {channel!r}; choose from {FORCE_CHANNELS}")
    return [replace(r, **{channel: getattr(r, channel) + offset}) for r in records]


# -- segmentation ----------------------------------------------------------------


@dataclass(frozen=True)
class SegmentWindow:
    label: str
    mode: FlightMode
    t_start: float
    t_end: float
    n: int
    means: dict[str, float]
    stds: dict[str, float]
    step: ScheduleStep

    def __post_init__(self):
        if self.t_end - self.t_start < 5.0 - 1e-9:
            raise DomainError("sampling windows must span at least 5 s")


@dataclass
class SegmentationResult:
    windows: list[SegmentWindow]
    warnings: list[str] = field(default_factory=list)


def _window_plan(schedule: TestSchedule) -> list[tuple[str, FlightMode, float, float, ScheduleStep]]:
    """Default sampling windows derived from the schedule structure."""
    plan = []
    bounds = schedule.bounds()
    neutral = [(s, e, st) for s, e, st in bounds if st.deflections == (0, 0, 0)]
    quad_steps = [b for b in neutral if b[2].mode() is FlightMode.QUAD]
    hybrid_steps = [b for b in neutral if b[2].mode() is FlightMode.HYBRID]
    plane_steps = [b for b in neutral if b[2].mode() is FlightMode.PLANE]
    if quad_steps:
        s, e, st = quad_steps[-1]
        plan.append(("quad", FlightMode.QUAD, max(s, e - 10.0), e, st))
    if hybrid_steps:
        s, e, st = hybrid_steps[-1]
        plan.append(("hybrid", FlightMode.HYBRID, max(s, e - 10.0), e, st))
    if plane_steps:
        s, e, st = plane_steps[0]
        plan.append(("plane", FlightMode.PLANE, max(s, e - 20.0), e, st))
    for s, e, st in bounds:
        da, de, dr = st.deflections
        if (da, de, dr) == (0, 0, 0):
            continue
        if da != 0:
            label = f"aileron:{st.aileron:+.0f}"
        elif de != 0:
            label = f"elevator:{st.elevator:+.0f}"
        else:
            label = f"rudder:{st.rudder:+.0f}"
        plan.append((label, st.mode(), max(s, e - 5.0), e, st))
    return plan


def segment(records: list[LogRecord], schedule: TestSchedule,
            windows: list[tuple[str, float, float]] | None = None) -> SegmentationResult:
    """Cut per-condition sampling windows and compute channel statistics.

    ``windows`` overrides the default plan with explicit (label, t0, t1)
    entries; the containing schedule step supplies mode and commands.
    """
    result = SegmentationResult(windows=[])
    if not records:
        return result

    ts = np.array([r.t for r in records])
    channels = {
        name: np.array([getattr(r, name) for r in records])
        for name in FORCE_CHANNELS + ("va", "temp_c")
    }
    dt = float(np.median(np.diff(ts))) if len(ts) > 1 else 0.0
    coverage_slack = 2.0 * dt

    if windows is None:
        plan = _window_plan(schedule)
    else:
        plan = []
        for label, t0, t1 in windows:
            step = schedule.step_at(0.5 * (t0 + t1))
            plan.append((label, step.mode(), t0, t1, step))

    for label, mode, t0, t1, step in plan:
        if ts[-1] < t1 - coverage_slack:
            result.warnings.append(
                f"window {label!r} [{t0:g}, {t1:g}] s not covered by records "
                f"(log ends at {ts[-1]:g} s); omitted")
            continue
        i0, i1 = np.searchsorted(ts, [t0, t1])
        if i1 <= i0:
            result.warnings.append(f"window {label!r} contains no samples; omitted")
            continue
        means = {k: float(v[i0:i1].mean()) for k, v in channels.items()}
        stds = {k: float(v[i0:i1].std()) for k, v in channels.items()}
        result.windows.append(SegmentWindow(
            label=label, mode=mode, t_start=t0, t_end=t1, n=int(i1 - i0),
            means=means, stds=stds, step=step))
    return result


# -- reduction --------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedPoint:
    """Per-window aerodynamic forces/moments and coefficient samples."""

    label: str
    mode: FlightMode
    alpha_deg: float
    airspeed: float
    lift: float
    drag: float
    side_force: float
    mx: float
    my: float
    mz: float
    sigma: dict[str, float]
    t_fwd: float
    t_vert: float
    aileron: float
    elevator: float
    rudder: float
    n: int
    c_lift: float | None = None
    c_drag_plane: float | None = None
    c_form_drag: float | None = None
    c_moment: float | None = None
    flags: tuple[str, ...] = ()


def reduce_window(window: SegmentWindow, alpha_deg: float, airspeed: float,
                  thrust_map: ThrustMap, geometry: VehicleGeometry,
                  atmosphere: Atmosphere, split_moment: bool = False) -> ReducedPoint:
    """Thrust-subtract a sampling window and resolve into wind-frame loads.

    The vertical group's net thrust uses the observed mean pitching moment:
    the rear pair is debited by My/l_Q per motor (or My/(2 l_Q) in
    ``split_moment`` mode). Coefficients are only defined at nonzero airspeed;
    the forces are reported regardless.
    """
    m = window.means
    a = math.radians(alpha_deg)
    nu_fwd, nu_quad = window.step.nu_fwd, window.step.nu_quad

    t_fwd = 0.0
    if nu_fwd > 1000.0:
        t_fwd = thrust_map.thrust(prop_alpha(alpha_deg, PropModule.FORWARD),
                                  airspeed, nu_fwd)
    t_vert = 0.0
    vert_on = nu_quad > 1000.0
    if vert_on:
        t_each = thrust_map.thrust(prop_alpha(alpha_deg, PropModule.VERTICAL),
                                   airspeed, nu_quad)
        deficit = m["my"] / (2.0 * geometry.quad_arm) if split_moment \
            else m["my"] / geometry.quad_arm
        t_vert = 2.0 * t_each + 2.0 * (t_each - deficit)

    fz_net = m["fz"] + t_vert
    fx_net = m["fx"] - t_fwd
    lift = -fz_net * math.cos(a) + fx_net * math.sin(a)
    drag = -fz_net * math.sin(a) - fx_net * math.cos(a)

    # first-order propagation, channels treated as independent
    s = window.stds
    var_my_term = (2.0 / geometry.quad_arm) ** 2 * s["my"] ** 2 if vert_on else 0.0
    var_z = s["fz"] ** 2 + var_my_term
    sigma = dict(s)
    sigma["lift"] = math.sqrt(var_z * math.cos(a) ** 2 + s["fx"] ** 2 * math.sin(a) ** 2)
    sigma["drag"] = math.sqrt(var_z * math.sin(a) ** 2 + s["fx"] ** 2 * math.cos(a) ** 2)

    da, de, dr = window.step.deflections
    flags: list[str] = []
    c_lift = c_drag = c_form = c_m = None
    if airspeed > 0:
        qs = dynamic_pressure_area(atmosphere, airspeed, geometry)
        c_lift = lift / qs
        if window.mode is FlightMode.PLANE:
            c_drag = drag / qs
            c_form = c_drag_form_from_measurement(drag, c_lift, airspeed,
                                                  geometry, atmosphere)
            if (da, de, dr) == (0, 0, 0):
                c_m = m["my"] / (qs * geometry.wing_chord)
    else:
        flags.append("coefficients undefined at zero airspeed")

    return ReducedPoint(
        label=window.label, mode=window.mode, alpha_deg=alpha_deg,
        airspeed=airspeed, lift=lift, drag=drag, side_force=m["fy"],
        mx=m["mx"], my=m["my"], mz=m["mz"], sigma=sigma,
        t_fwd=t_fwd, t_vert=t_vert, aileron=da, elevator=de, rudder=dr,
        n=window.n, c_lift=c_lift, c_drag_plane=c_drag, c_form_drag=c_form,
        c_moment=c_m, flags=tuple(flags))


def reduce_log(records: list[LogRecord], schedule: TestSchedule,
               alpha_deg: float, airspeed: float, thrust_map: ThrustMap,
               geometry: VehicleGeometry, atmosphere: Atmosphere,
               split_moment: bool = False) -> tuple[list[ReducedPoint], list[str]]:
    """Segment one run's records and reduce every window."""
    seg = segment(records, schedule)
    points = [
        reduce_window(w, alpha_deg, airspeed, thrust_map, geometry, atmosphere,
                      split_moment)
        for w in seg.windows
    ]
    warnings = list(seg.warnings)
    by_label = {p.label: p for p in points}
    if "plane" in by_label and "hybrid" in by_label:
        # flow interaction normally makes powered-mode scatter dominate;
        # the reverse ordering hints at a rig problem (data-quality flag only)
        if by_label["plane"].sigma["my"] > by_label["hybrid"].sigma["my"]:
            warnings.append(
                "pitching-moment scatter in the plane window exceeds the "
                "hybrid window; unexpected ordering, check the run")
    return points, warnings


# -- suite-sample derivation ---------------------------------------------------


def derive_suite_points(points: list[ReducedPoint], geometry: VehicleGeometry,
                        atmosphere: Atmosphere) -> tuple[list[SuitePoint], list[str]]:
    """Turn reduced points from a test campaign into fit-ready suite samples.

    Cross-mode couplings follow the reduction chain used to build the shipped
    suite: plane-mode data fixes the shared form drag and structural pitching
    moment; quad/hybrid drag is decomposed against the plane-mode form-drag
    sample at the same (alpha, V); the differential-thrust moment is the
    excess of a powered mode's pitching moment over the plane-mode baseline.
    """
    out: list[SuitePoint] = []
    warnings: list[str] = []
    # neutral plane-mode baselines keyed by (alpha, va)
    plane_neutral = {
        (p.alpha_deg, p.airspeed): p
        for p in points
        if p.mode is FlightMode.PLANE and p.label == "plane"
    }

    def bucket_of(p: ReducedPoint) -> int | None:
        if p.airspeed <= 0:
            return None
        b = int(round(p.airspeed))
        return b if b in (5, 11, 15) else None

    for p in points:
        b = bucket_of(p)
        if b is None:
            continue
        qs = dynamic_pressure_area(atmosphere, p.airspeed, geometry)
        qsc = qs * geometry.wing_chord
        baseline = plane_neutral.get((p.alpha_deg, p.airspeed))
        if p.label in ("quad", "hybrid", "plane"):
            out.append(SuitePoint(KIND_LIFT, b, p.alpha_deg, p.c_lift, p.mode))
            if p.mode is FlightMode.PLANE:
                out.append(SuitePoint(KIND_DRAG, b, p.alpha_deg, p.c_drag_plane, p.mode))
                out.append(SuitePoint(KIND_FORM_DRAG, b, p.alpha_deg, p.c_form_drag))
                out.append(SuitePoint(KIND_PITCH, b, p.alpha_deg, p.c_moment))
            else:
                if baseline is None:
                    warnings.append(
                        f"no plane-mode baseline at (alpha={p.alpha_deg:g}, "
                        f"V={p.airspeed:g}); drag split and moment excess skipped "
                        f"for {p.label!r}")
                    continue
                c_dp = (baseline.c_form_drag
                        + p.c_lift ** 2 / geometry.induced_drag_denominator)
                out.append(SuitePoint(KIND_DRAG, b, p.alpha_deg, c_dp, p.mode))
                c_dq = (p.drag - c_dp * qs) / p.airspeed
                out.append(SuitePoint(KIND_QUAD_DRAG, b, p.alpha_deg, c_dq, p.mode))
                out.append(SuitePoint(KIND_DIFF_THRUST, b, p.alpha_deg,
                                      p.my - baseline.my, p.mode))
        else:  # control-surface deflection window (plane phase)
            if baseline is None:
                warnings.append(
                    f"no neutral baseline at (alpha={p.alpha_deg:g}, "
                    f"V={p.airspeed:g}) for {p.label!r}; skipped")
                continue
            if p.aileron != 0:
                out.append(SuitePoint(KIND_ROLL_AILERON, b, p.aileron,
                                      (p.mx - baseline.mx) / qsc))
                out.append(SuitePoint(KIND_YAW_AILERON, b, p.aileron,
                                      (p.mz - baseline.mz) / qsc))
            elif p.elevator != 0:
                out.append(SuitePoint(KIND_ELEVATOR, b, p.elevator,
                                      (p.my - baseline.my) / qsc))
            elif p.rudder != 0:
                out.append(SuitePoint(KIND_ROLL_RUDDER, b, p.rudder,
                                      (p.mx - baseline.mx) / qsc))
                out.append(SuitePoint(KIND_YAW_RUDDER, b, p.rudder,
                                      (p.mz - baseline.mz) / qsc))
                out.append(SuitePoint(KIND_SIDE_FORCE, b, p.rudder,
                                      p.side_force / qs))
    # neutral-rudder side-force samples anchor the intercept
    for (alpha, va), p in plane_neutral.items():
        b = bucket_of(p)
        if b is not None:
            qs = dynamic_pressure_area(atmosphere, va, geometry)
            out.append(SuitePoint(KIND_SIDE_FORCE, b, 0.0, p.side_force / qs))
    return out, warnings
