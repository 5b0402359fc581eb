"""Planar-mesh interpolation of coefficients over (alpha, airspeed).

The fitted suite gives coefficients at three discrete airspeeds only. For
flight between those speeds (most of the transition corridor) each
coefficient surface is triangulated over the tested (alpha, V) rectangle and
the plane through each triangle's three vertices is stored; a lookup then
solves that plane for the coefficient.

Grid cells are split along the (low alpha, low V) -> (high alpha, high V)
diagonal; the lower triangle of each cell carries the even index. Plane
coefficients (a, b, c, d) satisfy a*alpha + b*V + c*value + d = 0 with unit
normal (a, b, c) and are sign-normalized so that d <= 0. Queries outside the
tested rectangle are refused - there is no data to extrapolate into.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .aero import AeroModel
from .core import FlightMode
from .exceptions import DomainError, EnvelopeError

MESH_KINDS = ("lift", "drag_plane", "drag_quad", "form_drag",
              "pitch_moment", "diff_thrust")

DEFAULT_ALPHA_GRID = (-5.0, 0.0, 5.0, 10.0)
DEFAULT_VA_GRID = (5.0, 11.0, 15.0)


def _vertex_value(model: AeroModel, mode: FlightMode, kind: str,
                  alpha: float, bucket: int) -> float:
    # vertex evaluation deliberately skips domain checks: the mesh rectangle
    # includes the (10 deg, 5 m/s) corner beyond the low-speed stall boundary
    if kind == "lift":
        return model.c_lift(mode, bucket, alpha, check_domain=False)
    if kind == "drag_plane":
        return model.c_drag_plane(mode, bucket, alpha, check_domain=False)
    if kind == "drag_quad":
        return model.c_quad_drag(mode, bucket, alpha, "linear", check_domain=False)
    if kind == "form_drag":
        return model.c_form_drag(bucket, alpha, check_domain=False)
    if kind == "pitch_moment":
        return model.c_moment(bucket, alpha, 0.0, check_domain=False)
    if kind == "diff_thrust":
        return model.diff_thrust_moment(mode, bucket, alpha, check_domain=False)
    raise DomainError(f"unknown mesh coefficient kind {kind!r}; choose from {MESH_KINDS}")


@dataclass(frozen=True)
class TriMesh:
    """Triangulated coefficient surface with per-triangle plane equations."""

    kind: str
    mode: FlightMode
    alpha_grid: tuple[float, ...]
    va_grid: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]        # values[iv][ia]
    triangles: tuple[tuple[int, int, int], ...]  # vertex ids, id = iv*len(alpha)+ia
    planes: tuple[tuple[float, float, float, float], ...]

    def vertex(self, vid: int) -> tuple[float, float, float]:
        na = len(self.alpha_grid)
        iv, ia = divmod(vid, na)
        return self.alpha_grid[ia], self.va_grid[iv], self.values[iv][ia]

    def locate(self, alpha: float, va: float) -> int:
        """Index of the triangle containing the point (boundaries resolve to
        the lower-indexed triangle)."""
        ag, vg = self.alpha_grid, self.va_grid
        if not (ag[0] <= alpha <= ag[-1] and vg[0] <= va <= vg[-1]):
            raise EnvelopeError(
                f"({alpha:g} deg, {va:g} m/s) outside the fitted envelope "
                f"[{ag[0]:g}, {ag[-1]:g}] x [{vg[0]:g}, {vg[-1]:g}]")
        ia = max(0, bisect_left(ag, alpha) - 1)
        iv = max(0, bisect_left(vg, va) - 1)
        ta = (alpha - ag[ia]) / (ag[ia + 1] - ag[ia])
        tv = (va - vg[iv]) / (vg[iv + 1] - vg[iv])
        cell = iv * (len(ag) - 1) + ia
        # below (or on) the low-low -> high-high diagonal is the lower triangle
        return 2 * cell + (0 if tv <= ta else 1)

    def interp(self, alpha: float, va: float) -> float:
        """Coefficient value from the containing triangle's plane."""
        a, b, c, d = self.planes[self.locate(alpha, va)]
        return -(a * alpha + b * va + d) / c

    def plane_through(self, alpha: float, va: float) -> tuple[float, float, float, float]:
        return self.planes[self.locate(alpha, va)]

    def to_dict(self) -> dict:
        out = []
        for tid, (tri, plane) in enumerate(zip(self.triangles, self.planes)):
            out.append({
                "id": tid,
                "vertices": [list(self.vertex(v)) for v in tri],
                "plane": list(plane),
            })
        return {
            "kind": self.kind,
            "mode": self.mode.value,
            "alpha_grid_deg": list(self.alpha_grid),
            "airspeed_grid_mps": list(self.va_grid),
            "triangles": out,
        }


def _plane(p1, p2, p3) -> tuple[float, float, float, float]:
    u = (p2[0] - p1[0], p2[1] - p1[1], p2[2] - p1[2])
    v = (p3[0] - p1[0], p3[1] - p1[1], p3[2] - p1[2])
    n = (u[1] * v[2] - u[2] * v[1],
         u[2] * v[0] - u[0] * v[2],
         u[0] * v[1] - u[1] * v[0])
    norm = math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
    if norm == 0:
        raise DomainError("degenerate triangle")
    a, b, c = (x / norm for x in n)
    d = -(a * p1[0] + b * p1[1] + c * p1[2])
    if abs(c) < 1e-12:
        raise DomainError("vertical plane: coefficient not solvable")
    if d > 1e-12 or (abs(d) <= 1e-12 and c < 0):
        a, b, c, d = -a, -b, -c, -d
    return a, b, c, d


def build_mesh(model: AeroModel, mode: FlightMode | str, kind: str,
               alpha_grid=DEFAULT_ALPHA_GRID, va_grid=DEFAULT_VA_GRID) -> TriMesh:
    """Triangulate one coefficient surface of the fitted model."""
    mode = FlightMode.parse(mode)
    alpha_grid = tuple(float(a) for a in alpha_grid)
    va_grid = tuple(float(v) for v in va_grid)
    if len(alpha_grid) < 2 or len(va_grid) < 2:
        raise DomainError("mesh needs at least a 2x2 grid of fitted points")

    values = []
    for va in va_grid:
        bucket = int(va)
        row = []
        for alpha in alpha_grid:
            try:
                row.append(_vertex_value(model, mode, kind, alpha, bucket))
            except KeyError:
                raise DomainError(
                    f"cannot build {kind} mesh: no fit for ({mode.value}, {bucket} m/s)")
        values.append(tuple(row))

    na = len(alpha_grid)
    triangles: list[tuple[int, int, int]] = []
    planes: list[tuple[float, float, float, float]] = []

    def vid(iv: int, ia: int) -> int:
        return iv * na + ia

    def point(iv: int, ia: int):
        return (alpha_grid[ia], va_grid[iv], values[iv][ia])

    for iv in range(len(va_grid) - 1):
        for ia in range(na - 1):
            lower = (vid(iv, ia), vid(iv, ia + 1), vid(iv + 1, ia + 1))
            upper = (vid(iv, ia), vid(iv + 1, ia + 1), vid(iv + 1, ia))
            for tri in (lower, upper):
                triangles.append(tri)
                planes.append(_plane(*(point(v // na, v % na) for v in tri)))

    return TriMesh(kind=kind, mode=mode, alpha_grid=alpha_grid, va_grid=va_grid,
                   values=tuple(values), triangles=tuple(triangles),
                   planes=tuple(planes))


class CoefficientInterpolator:
    """Bundle of meshes giving smooth coefficients over (alpha, airspeed)."""

    def __init__(self, model: AeroModel, mode: FlightMode | str):
        self.model = model
        self.mode = FlightMode.parse(mode)
        self._meshes: dict[str, TriMesh] = {}

    def _mesh(self, kind: str) -> TriMesh:
        if kind not in self._meshes:
            self._meshes[kind] = build_mesh(self.model, self.mode, kind)
        return self._meshes[kind]

    def c_lift(self, alpha: float, va: float) -> float:
        return self._mesh("lift").interp(alpha, va)

    def c_drag_plane(self, alpha: float, va: float) -> float:
        return self._mesh("drag_plane").interp(alpha, va)

    def c_drag_quad(self, alpha: float, va: float) -> float:
        if self.mode is FlightMode.PLANE:
            return 0.0
        return self._mesh("drag_quad").interp(alpha, va)

    def c_pitch(self, alpha: float, va: float) -> float:
        return self._mesh("pitch_moment").interp(alpha, va)

    def diff_thrust_moment(self, alpha: float, va: float) -> float:
        if self.mode is FlightMode.PLANE:
            return 0.0
        return self._mesh("diff_thrust").interp(alpha, va)

    def _va_blend(self, va: float, value_at) -> float:
        buckets = self.model.buckets
        if not buckets[0] <= va <= buckets[-1]:
            raise EnvelopeError(f"airspeed {va:g} outside bucket range {buckets}")
        hi = bisect_left(buckets, va)
        hi = min(hi, len(buckets) - 1)
        if buckets[hi] == va:
            return value_at(buckets[hi])
        lo = hi - 1
        t = (va - buckets[lo]) / (buckets[hi] - buckets[lo])
        return (1 - t) * value_at(buckets[lo]) + t * value_at(buckets[hi])

    def c_elevator(self, va: float) -> float:
        """Elevator moment coefficient, 1-D linear in airspeed between buckets."""
        return self._va_blend(va, lambda b: self.model.pitch_elevator[b].c_de)

    def lateral_at(self, va: float):
        """Lateral slopes blended linearly in airspeed (no alpha dependence)."""
        from .aero import LateralModel
        return LateralModel(
            c_rm_da=self._va_blend(va, lambda b: self.model.lateral[b].c_rm_da),
            c_rm_dr=self._va_blend(va, lambda b: self.model.lateral[b].c_rm_dr),
            c_ym_da=self._va_blend(va, lambda b: self.model.lateral[b].c_ym_da),
            c_ym_dr=self._va_blend(va, lambda b: self.model.lateral[b].c_ym_dr),
            c_sf0=self._va_blend(va, lambda b: self.model.lateral[b].c_sf0),
            c_sf_dr=self._va_blend(va, lambda b: self.model.lateral[b].c_sf_dr))
