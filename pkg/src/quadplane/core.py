"""Shared constants, value types, angle conventions and frame rotations.

Conventions used throughout the package:

* body frame is FRD (x forward, y right, z down); the wind frame is the
  zero-sideslip lift/drag/side-force triad,
* all fitted-model angles are in degrees (the tabulated slopes are per
  degree); trigonometry converts to radians internally,
* ESC commands are pulse widths in microseconds, 1000 (idle) .. 2000 (full),
* control-surface deflections are normalized fractions in [-1, 1] where
  +/-1 corresponds to +/-100 % of the command scale used during testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .exceptions import DomainError, FrameError

GRAVITY = 9.81  # m/s^2

# Tunnel air at ~1 atm / 20 C; nu_kin chosen so the tabulated chord Reynolds
# numbers (50,427 / 110,939 / 151,281 at 5/11/15 m/s) are reproduced exactly.
DEFAULT_AIR_DENSITY = 1.225  # kg/m^3
DEFAULT_KINEMATIC_VISCOSITY = 1.5111e-5  # m^2/s

ESC_IDLE = 1000.0  # microseconds
ESC_MAX = 2000.0


class FlightMode(str, Enum):
    """Vehicle configuration: which propulsion groups are active."""

    QUAD = "quad"       # vertical modules only
    HYBRID = "hybrid"   # all motors active (transition flight)
    PLANE = "plane"     # forward motor + control surfaces only

    @classmethod
    def parse(cls, value: "FlightMode | str") -> "FlightMode":
        if isinstance(value, FlightMode):
            return value
        return cls(str(value).strip().lower())


class PropModule(str, Enum):
    FORWARD = "forward"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class VehicleGeometry:
    """Fixed geometric and mass properties of the airframe.

    ``planform_area`` must equal span*chord and ``aspect_ratio`` span/chord;
    ``weight`` must equal mass*g. Violations raise at construction.
    """

    wing_span: float          # b, m
    wing_chord: float         # c, m
    planform_area: float      # S, m^2
    aspect_ratio: float       # AR
    oswald_e: float           # Oswald span efficiency
    incidence_deg: float      # wing incidence relative to body x
    quad_arm: float           # l_Q, m, vertical-module arm from cg
    mass: float               # kg
    weight: float             # N

    def __post_init__(self):
        def _rel(a: float, b: float) -> float:
            return abs(a - b) / max(abs(a), abs(b), 1e-300)

        if _rel(self.planform_area, self.wing_span * self.wing_chord) > 1e-9:
            raise DomainError("planform_area inconsistent with span*chord")
        if _rel(self.aspect_ratio, self.wing_span / self.wing_chord) > 1e-9:
            raise DomainError("aspect_ratio inconsistent with span/chord")
        if _rel(self.weight, self.mass * GRAVITY) > 1e-9:
            raise DomainError("weight inconsistent with mass*g")
        if min(self.wing_span, self.wing_chord, self.quad_arm, self.mass) <= 0:
            raise DomainError("geometry lengths and mass must be positive")

    @classmethod
    def from_span_chord(cls, span: float, chord: float, *, oswald_e: float,
                        incidence_deg: float, quad_arm: float, mass: float) -> "VehicleGeometry":
        return cls(
            wing_span=span,
            wing_chord=chord,
            planform_area=span * chord,
            aspect_ratio=span / chord,
            oswald_e=oswald_e,
            incidence_deg=incidence_deg,
            quad_arm=quad_arm,
            mass=mass,
            weight=mass * GRAVITY,
        )

    @property
    def induced_drag_denominator(self) -> float:
        """pi * e * AR, the divisor of CL^2 in the induced-drag term."""
        return math.pi * self.oswald_e * self.aspect_ratio


def quadplane_v1_geometry() -> VehicleGeometry:
    """Built-in geometry profile of the tested QuadPlane prototype."""
    return VehicleGeometry.from_span_chord(
        span=1.2192, chord=0.1524,
        oswald_e=0.95, incidence_deg=5.0, quad_arm=0.4826, mass=1.684,
    )


@dataclass(frozen=True)
class Atmosphere:
    """Ambient air properties used for dynamic pressure and Reynolds number."""

    density: float = DEFAULT_AIR_DENSITY
    kinematic_viscosity: float = DEFAULT_KINEMATIC_VISCOSITY

    def __post_init__(self):
        if self.density <= 0 or self.kinematic_viscosity <= 0:
            raise DomainError("density and kinematic viscosity must be positive")


@dataclass(frozen=True)
class FlightCondition:
    """A single evaluation point: mode, attitude, airspeed and commands."""

    mode: FlightMode
    alpha_deg: float               # vehicle angle of attack
    airspeed: float                # m/s
    flight_path_deg: float = 0.0   # gamma; 0 in the tunnel
    esc_fwd: float = ESC_IDLE      # microseconds
    esc_quad: float = ESC_IDLE
    aileron: float = 0.0           # normalized fraction, -1..1
    elevator: float = 0.0
    rudder: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", FlightMode.parse(self.mode))
        if self.airspeed < 0:
            raise DomainError("airspeed must be non-negative")
        for name in ("esc_fwd", "esc_quad"):
            nu = getattr(self, name)
            if not ESC_IDLE <= nu <= ESC_MAX:
                raise DomainError(f"{name}={nu} outside [{ESC_IDLE}, {ESC_MAX}] us")
        for name in ("aileron", "elevator", "rudder"):
            if abs(getattr(self, name)) > 1.0:
                raise DomainError(f"{name} outside [-1, 1]")
        if self.mode is FlightMode.PLANE and self.esc_quad != ESC_IDLE:
            raise DomainError("plane mode requires vertical motors at idle")
        if self.mode is FlightMode.QUAD and self.esc_fwd != ESC_IDLE:
            raise DomainError("quad mode requires the forward motor at idle")

    def with_(self, **kwargs) -> "FlightCondition":
        return replace(self, **kwargs)

    @property
    def pitch_deg(self) -> float:
        """theta = alpha_V - gamma; equals alpha_V for tunnel conditions."""
        return self.alpha_deg - self.flight_path_deg


@dataclass(frozen=True)
class ForcesMoments:
    """Six-component wrench with an explicit frame tag ('body' or 'wind')."""

    frame: str
    fx: float = 0.0
    fy: float = 0.0
    fz: float = 0.0
    mx: float = 0.0
    my: float = 0.0
    mz: float = 0.0

    def __post_init__(self):
        if self.frame not in ("body", "wind"):
            raise FrameError(f"unknown frame tag {self.frame!r}")

    def require_frame(self, frame: str) -> None:
        if self.frame != frame:
            raise FrameError(f"expected {frame}-frame wrench, got {self.frame}")


def reynolds(airspeed: float, chord: float, kinematic_viscosity: float) -> float:
    """Chord Reynolds number V*c/nu. All inputs must be non-negative."""
    if airspeed < 0 or chord < 0 or kinematic_viscosity <= 0:
        raise DomainError("reynolds inputs must be non-negative (nu > 0)")
    return airspeed * chord / kinematic_viscosity


def wing_alpha(alpha_v_deg: float, incidence_deg: float) -> float:
    """Wing angle of attack: vehicle alpha plus wing incidence."""
    return alpha_v_deg + incidence_deg


def prop_alpha(alpha_v_deg: float, module: PropModule) -> float:
    """Propeller angle of attack for a propulsion module.

    The forward module sees the vehicle alpha directly; the vertical modules
    are mounted 90 degrees to the body x axis, so their propeller alpha is
    alpha_V + 90. Mirrored conventions (-alpha_p vs 180-alpha_p describe the
    same edgewise geometry) collapse to this one under the tested grid.
    """
    if module is PropModule.FORWARD:
        return alpha_v_deg
    if module is PropModule.VERTICAL:
        return alpha_v_deg + 90.0
    raise DomainError(f"unknown propulsion module {module!r}")


def body_to_wind(wrench: ForcesMoments, alpha_deg: float) -> tuple[float, float, float]:
    """Resolve body-frame forces into (lift, drag, side force).

    Zero-sideslip convention: the rotation is about the body y axis only and
    the side force passes through unchanged.
    """
    wrench.require_frame("body")
    a = math.radians(alpha_deg)
    lift = -wrench.fz * math.cos(a) + wrench.fx * math.sin(a)
    drag = -wrench.fz * math.sin(a) - wrench.fx * math.cos(a)
    return lift, drag, wrench.fy


def wind_to_body(lift: float, drag: float, side: float, alpha_deg: float) -> ForcesMoments:
    """Inverse of :func:`body_to_wind`; returns a body-frame force set."""
    a = math.radians(alpha_deg)
    fx = lift * math.sin(a) - drag * math.cos(a)
    fz = -lift * math.cos(a) - drag * math.sin(a)
    return ForcesMoments(frame="body", fx=fx, fy=side, fz=fz)
