"""Pydantic request/response models for the HTTP service (and thin CLI)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Mode = Literal["quad", "hybrid", "plane"]


class ErrorBody(BaseModel):
    type: str
    reason: str
    message: str
    detail: dict = Field(default_factory=dict)


class ErrorResponse(BaseModel):
    error: ErrorBody


# -- eval -----------------------------------------------------------------------


class EvalRequest(BaseModel):
    mode: Mode
    alpha_deg: float
    airspeed_mps: float = Field(ge=0)
    esc_fwd_us: float = Field(default=1000, ge=1000, le=2000)
    esc_quad_us: float = Field(default=1000, ge=1000, le=2000)
    aileron: float = Field(default=0, ge=-1, le=1)
    elevator: float = Field(default=0, ge=-1, le=1)
    rudder: float = Field(default=0, ge=-1, le=1)
    interp: bool = False
    quad_drag_fit: Literal["linear", "quadratic"] = "linear"


class Coefficients(BaseModel):
    c_lift: float
    c_drag_plane: float
    c_drag_quad: float
    c_form_drag: Optional[float] = None
    c_moment: float
    c_side_force: float
    c_roll_moment: float
    c_yaw_moment: float


class Wrench(BaseModel):
    frame: Literal["body", "wind"]
    fx: float
    fy: float
    fz: float
    mx: float
    my: float
    mz: float


class EvalResponse(BaseModel):
    mode: Mode
    alpha_deg: float
    airspeed_mps: float
    reynolds: float
    bucket_mps: Optional[int] = None   # null when mesh-interpolated
    coefficients: Optional[Coefficients] = None
    lift_N: float
    drag_N: float
    side_force_N: float
    pitch_moment_Nm: float
    t_fwd_N: float
    t_vert_N: float
    wrench: Wrench
    flags: list[str] = Field(default_factory=list)


# -- thrust ----------------------------------------------------------------------


class ThrustRequest(BaseModel):
    alpha_p_deg: float
    airspeed_mps: float = Field(ge=0)
    esc_us: float = Field(ge=1000, le=2000)


class ThrustResponse(BaseModel):
    thrust_N: float
    clamped_alpha: bool
    clamped_airspeed: bool


# -- trim / transition / envelope -------------------------------------------------


class TrimRequest(BaseModel):
    mode: Mode
    airspeed_mps: float = Field(ge=0)
    alpha_deg: Optional[float] = None
    pitch_policy: Literal["elevator", "elevator-only"] = "elevator"
    strict: bool = False


class TrimResponse(BaseModel):
    mode: Mode
    alpha_deg: float
    airspeed_mps: float
    esc_fwd_us: float
    esc_quad_us: float
    elevator: float
    t_fwd_N: float
    t_vert_N: float
    force_residual_N: float
    moment_residual_Nm: float
    tilt_residual_N: float
    feasible: bool
    constraints: list[str] = Field(default_factory=list)
    flags: list[str] = Field(default_factory=list)


class TransitionRequest(BaseModel):
    v_from_mps: float = Field(ge=0)
    v_to_mps: float = Field(ge=0)
    steps: int = Field(default=12, ge=1, le=1000)
    alpha_policy_deg: float = 5.0
    pitch_policy: Literal["elevator", "elevator-only"] = "elevator"


class TransitionResponse(BaseModel):
    direction: Literal["accelerate", "decelerate"]
    entries: list[TrimResponse]


class EnvelopeRequest(BaseModel):
    mode: Mode
    alpha_grid_deg: list[float] = Field(default=[-5, 0, 5, 10])
    va_grid_mps: list[float] = Field(default=[5, 11, 15])


class EnvelopeCellModel(BaseModel):
    mode: Mode
    alpha_deg: float
    airspeed_mps: float
    feasible: bool
    binding: Optional[str] = None
    margins: dict[str, float] = Field(default_factory=dict)


class EnvelopeResponse(BaseModel):
    cells: list[EnvelopeCellModel]


# -- mesh ------------------------------------------------------------------------


class MeshRequest(BaseModel):
    mode: Mode
    coefficient: Literal["lift", "drag_plane", "drag_quad", "form_drag",
                         "pitch_moment", "diff_thrust"]


class MeshTriangle(BaseModel):
    id: int
    vertices: list[list[float]]
    plane: list[float]


class MeshResponse(BaseModel):
    kind: str
    mode: Mode
    alpha_grid_deg: list[float]
    airspeed_grid_mps: list[float]
    triangles: list[MeshTriangle]


# -- reduce / fit ------------------------------------------------------------------


class ScheduleRow(BaseModel):
    end_time_s: float
    quad_throttle_pct: float
    fwd_throttle_pct: float
    aileron_pct: float = 0
    elevator_pct: float = 0
    rudder_pct: float = 0


class ReduceRequest(BaseModel):
    csv_text: str
    alpha_deg: float
    airspeed_mps: float = Field(ge=0)
    offsets: dict[str, float] = Field(default_factory=dict)
    schedule: Optional[list[ScheduleRow]] = None
    split_moment: bool = False


class ReducedPointModel(BaseModel):
    label: str
    mode: Mode
    alpha_deg: float
    airspeed_mps: float
    lift_N: float
    drag_N: float
    side_force_N: float
    mx_Nm: float
    my_Nm: float
    mz_Nm: float
    sigma_lift_N: float
    sigma_drag_N: float
    sigma_my_Nm: float
    t_fwd_N: float
    t_vert_N: float
    aileron: float
    elevator: float
    rudder: float
    n_samples: int
    c_lift: Optional[float] = None
    c_drag_plane: Optional[float] = None
    c_form_drag: Optional[float] = None
    c_moment: Optional[float] = None
    flags: list[str] = Field(default_factory=list)


class ReduceResponse(BaseModel):
    points: list[ReducedPointModel]
    warnings: list[str] = Field(default_factory=list)
    rejected_rows: list[str] = Field(default_factory=list)
    provenance: dict = Field(default_factory=dict)


class SuitePointModel(BaseModel):
    kind: str
    bucket_mps: int
    x: float
    value: float
    mode: Optional[Mode] = None


class FitRequest(BaseModel):
    # rows of (alpha_p_deg, airspeed_mps, esc_us, thrust_N)
    thrust_samples: Optional[list[list[float]]] = None
    suite_points: Optional[list[SuitePointModel]] = None
    reduced_points: Optional[list[ReducedPointModel]] = None
    source: str = "fit-request"


class FitResponse(BaseModel):
    database: Optional[dict] = None
    thrust_report: Optional[dict] = None
    suite_report: Optional[dict] = None
    warnings: list[str] = Field(default_factory=list)


class InfoResponse(BaseModel):
    name: str
    provenance: dict
    table_checksum: str
    warnings: list[str]
    mass_kg: float
    weight_N: float
    wing_area_m2: float
