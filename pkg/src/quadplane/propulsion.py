"""Propulsion-module thrust models.

A single propulsion module (motor + ESC + 9.5x4.5 prop) is characterized by
cubic thrust-vs-ESC-signal curves measured on a dynamometer at combinations
of propeller angle of attack and airspeed. The :class:`ThrustMap` holds one
cubic per tested grid point and interpolates evaluated thrust (never raw
coefficients) bilinearly between grid lines.

The tested alpha_p grid covers two bands: near-axial flow (-5..10 deg, the
forward module) and near-edgewise flow (80..100 deg, the vertical modules).
Queries inside the untested 70-degree gap between the bands are refused --
the flow regime changes and no data supports interpolation there.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .core import ESC_IDLE, ESC_MAX
from .exceptions import DomainError, EnvelopeError, InfeasibleError

ALPHA_BAND_LOW = (-5.0, 0.0, 5.0, 10.0)
ALPHA_BAND_HIGH = (80.0, 85.0, 90.0, 95.0, 100.0)
VA_GRID = (0.0, 5.0, 11.0, 15.0)

# Motor dead zone ends near 25 % throttle; the cubic is monotone above it.
ESC_MONOTONE_MIN = 1250.0

IDLE_THRUST_LIMIT = 1.5  # N; |T(1000us)| beyond this flags a suspect curve


@dataclass(frozen=True)
class CubicThrustCurve:
    """Thrust (N) as a cubic polynomial of ESC pulse width (us)."""

    c0: float
    c1: float
    c2: float
    c3: float
    r_squared: float | None = None
    rmse: float | None = None

    def thrust(self, esc_us: float) -> float:
        if not ESC_IDLE <= esc_us <= ESC_MAX:
            raise DomainError(f"ESC signal {esc_us} us outside [{ESC_IDLE}, {ESC_MAX}]")
        return self._eval(esc_us)

    def _eval(self, nu: float) -> float:
        return self.c0 + nu * (self.c1 + nu * (self.c2 + nu * self.c3))

    def validate(self) -> list[str]:
        """Data-quality checks; returns human-readable issue strings."""
        issues = []
        idle = self._eval(ESC_IDLE)
        if abs(idle) >= IDLE_THRUST_LIMIT:
            issues.append(f"idle thrust {idle:.2f} N exceeds {IDLE_THRUST_LIMIT} N")
        if self.c3 > 0:
            issues.append(f"positive cubic coefficient c3={self.c3:g} (sign anomaly)")
        prev = self._eval(ESC_MONOTONE_MIN)
        nu = ESC_MONOTONE_MIN + 1.0
        while nu <= ESC_MAX:  # 1 us steps over the monotone segment
            cur = self._eval(nu)
            if cur < prev - 1e-12:
                issues.append(f"not monotone at {nu:.0f} us")
                break
            prev = cur
            nu += 1.0
        return issues


@dataclass(frozen=True)
class QuadraticRpmCurve:
    """Static thrust (N) versus motor speed (rpm); convex in speed."""

    c0: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.c2 <= 0:
            raise DomainError("thrust must be convex in motor speed (c2 > 0)")

    def thrust(self, rpm: float) -> float:
        if rpm < 0:
            raise DomainError("motor speed must be non-negative")
        return self.c0 + self.c1 * rpm + self.c2 * rpm * rpm


def static_thrust_esc(curve: CubicThrustCurve, esc_us: float) -> float:
    """Evaluate a bench-test cubic at an ESC command."""
    return curve.thrust(esc_us)


class ThrustQuery(NamedTuple):
    thrust: float
    clamped_alpha: bool
    clamped_airspeed: bool


class VerticalThrust(NamedTuple):
    total: float
    front_each: float
    rear_each: float


def vertical_thrust_total(t_dynamic: float, m_y: float, quad_arm: float,
                          split_moment: bool = False) -> VerticalThrust:
    """Net vertical thrust of the four modules given an observed pitch moment.

    The front pair produces the isolated-module dynamic thrust; the rear pair
    runs in disturbed flow and is debited by the observed pitching moment over
    the arm length. ``split_moment`` attributes only half the moment to the
    rear pair (the alternative reading of the published correction, which
    matches the quoted 27.5 % rear deficit); default is the equation as
    printed, which debits the full moment per rear motor.
    """
    if quad_arm <= 0:
        raise DomainError("quad arm length must be positive")
    deficit = m_y / (2.0 * quad_arm) if split_moment else m_y / quad_arm
    rear = t_dynamic - deficit
    total = 2.0 * t_dynamic + 2.0 * rear
    return VerticalThrust(total=total, front_each=t_dynamic, rear_each=rear)


def _band_for(alpha_p: float) -> tuple[float, ...]:
    if alpha_p <= ALPHA_BAND_LOW[-1]:
        return ALPHA_BAND_LOW
    if alpha_p >= ALPHA_BAND_HIGH[0]:
        return ALPHA_BAND_HIGH
    raise EnvelopeError(
        f"alpha_p={alpha_p:g} deg lies in the untested gap "
        f"({ALPHA_BAND_LOW[-1]:g}, {ALPHA_BAND_HIGH[0]:g}); no interpolation across bands"
    )


def _bracket(grid: tuple[float, ...], x: float) -> tuple[int, int, float]:
    """Indices of the bracketing grid lines and the interpolation weight."""
    if x <= grid[0]:
        return 0, 0, 0.0
    if x >= grid[-1]:
        n = len(grid) - 1
        return n, n, 0.0
    hi = bisect_left(grid, x)
    if grid[hi] == x:
        return hi, hi, 0.0
    lo = hi - 1
    t = (x - grid[lo]) / (grid[hi] - grid[lo])
    return lo, hi, t


@dataclass(frozen=True)
class ThrustMap:
    """Grid of dynamic-thrust cubics keyed by (alpha_p deg, airspeed m/s)."""

    curves: dict[tuple[float, float], CubicThrustCurve]

    def __post_init__(self):
        expected = {(a, v) for a in ALPHA_BAND_LOW + ALPHA_BAND_HIGH for v in VA_GRID}
        have = set(self.curves)
        if have != expected:
            missing = sorted(expected - have)
            extra = sorted(have - expected)
            raise DomainError(f"incomplete thrust map: missing {missing}, extra {extra}")

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "ThrustMap":
        curves = {}
        for row in rows:
            key = (float(row["alpha_p_deg"]), float(row["airspeed_mps"]))
            if key in curves:
                raise DomainError(f"duplicate thrust-map row {key}")
            curves[key] = CubicThrustCurve(
                c0=row["c0"], c1=row["c1"], c2=row["c2"], c3=row["c3"],
                r_squared=row.get("r2"), rmse=row.get("rmse"),
            )
        return cls(curves=curves)

    def curve(self, alpha_p: float, airspeed: float) -> CubicThrustCurve:
        try:
            return self.curves[(alpha_p, airspeed)]
        except KeyError:
            raise DomainError(f"({alpha_p}, {airspeed}) is not a thrust-map grid point")

    def validate(self) -> dict[tuple[float, float], list[str]]:
        """Per-cell data-quality issues (empty dict when all curves clean)."""
        report = {}
        for key in sorted(self.curves):
            issues = self.curves[key].validate()
            if issues:
                report[key] = issues
        return report

    def thrust_ex(self, alpha_p: float, airspeed: float, esc_us: float) -> ThrustQuery:
        """Dynamic thrust with clamp flags.

        alpha_p clamps to the nearest edge of its band; airspeed above the
        tested 15 m/s clamps with a flag, negative airspeed is rejected.
        """
        if not ESC_IDLE <= esc_us <= ESC_MAX:
            raise DomainError(f"ESC signal {esc_us} us outside [{ESC_IDLE}, {ESC_MAX}]")
        if airspeed < 0:
            raise DomainError("airspeed must be non-negative")
        band = _band_for(alpha_p)
        a = min(max(alpha_p, band[0]), band[-1])
        clamped_alpha = a != alpha_p
        v = min(airspeed, VA_GRID[-1])
        clamped_va = v != airspeed

        ia0, ia1, ta = _bracket(band, a)
        iv0, iv1, tv = _bracket(VA_GRID, v)

        def at(ai: int, vi: int) -> float:
            return self.curves[(band[ai], VA_GRID[vi])]._eval(esc_us)

        t00 = at(ia0, iv0)
        t10 = at(ia1, iv0) if ia1 != ia0 else t00
        t01 = at(ia0, iv1) if iv1 != iv0 else t00
        t11 = at(ia1, iv1) if (ia1 != ia0 or iv1 != iv0) else t00
        thrust = ((1 - ta) * (1 - tv) * t00 + ta * (1 - tv) * t10
                  + (1 - ta) * tv * t01 + ta * tv * t11)
        return ThrustQuery(thrust=thrust, clamped_alpha=clamped_alpha,
                           clamped_airspeed=clamped_va)

    def thrust(self, alpha_p: float, airspeed: float, esc_us: float) -> float:
        return self.thrust_ex(alpha_p, airspeed, esc_us).thrust

    def max_thrust(self, alpha_p: float, airspeed: float) -> float:
        return self.thrust(alpha_p, airspeed, ESC_MAX)

    def invert(self, alpha_p: float, airspeed: float, target: float) -> float:
        """ESC command achieving ``target`` N at this flow condition."""
        return invert_thrust(lambda nu: self.thrust(alpha_p, airspeed, nu), target)


def dynamic_thrust(thrust_map: ThrustMap, alpha_p: float, airspeed: float,
                   esc_us: float) -> float:
    return thrust_map.thrust(alpha_p, airspeed, esc_us)


def invert_thrust(curve: CubicThrustCurve | Callable[[float], float],
                  target: float, tol: float = 1e-9) -> float:
    """Find the ESC command on the monotone segment producing ``target`` N.

    Bisection over [1250, 2000] us (the region above the motor dead zone,
    where thrust is monotone non-decreasing). Targets outside the achievable
    interval raise :class:`InfeasibleError` carrying that interval.
    """
    f = curve.thrust if isinstance(curve, CubicThrustCurve) else curve
    lo, hi = ESC_MONOTONE_MIN, ESC_MAX
    flo, fhi = f(lo), f(hi)
    if not flo - tol <= target <= fhi + tol:
        raise InfeasibleError(
            f"target {target:.3f} N outside achievable [{flo:.3f}, {fhi:.3f}] N",
            reason="thrust",
            detail={"achievable_min_N": flo, "achievable_max_N": fhi},
        )
    target = min(max(target, flo), fhi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm - target) <= tol or (hi - lo) < 1e-9:
            return mid
        if fm < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
