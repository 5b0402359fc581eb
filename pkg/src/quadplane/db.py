"""Self-describing coefficient database: one JSON file carries the vehicle
profile, atmosphere, thrust map and the full aerodynamic suite.

The packaged ``quadplane-v1`` database stores the published wind-tunnel
tables verbatim, including one curious row: the thrust cubic at
(alpha_p=95 deg, Va=0) has a positive cubic coefficient unlike every other
cell. The loader surfaces that as a warning instead of silently editing data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .aero import (AeroModel, DiffThrustMomentFit, DragFit, ElevatorMomentFit,
                   FitMeta, LateralModel, LiftFit, PitchMomentFit, QuadDragFit)
from .core import Atmosphere, FlightMode, VehicleGeometry
from .exceptions import FormatError
from .propulsion import ThrustMap

SCHEMA_VERSION = 1
DEFAULT_DB_NAME = "quadplane_v1.json"

# sections covered by the integrity checksum (the shipped numeric tables)
_CHECKSUM_SECTIONS = ("vehicle", "atmosphere", "thrust_map", "aero")


def _meta(row: dict, mode: FlightMode | None = None) -> FitMeta:
    return FitMeta(mode=mode, airspeed=row.get("airspeed_mps"),
                   reynolds=row.get("re"), r_squared=row.get("r2"),
                   rmse=row.get("rmse"))


def _build_aero_model(aero: dict, stall_boundary: dict[int, float]) -> AeroModel:
    lift, drag, form_drag, quad_drag = {}, {}, {}, {}
    pitch, elevator, diff_thrust, lateral = {}, {}, {}, {}
    for row in aero["lift"]:
        mode = FlightMode.parse(row["mode"])
        lift[(mode, row["airspeed_mps"])] = LiftFit(
            c0=row["c0"], c_alpha=row["c_alpha"], meta=_meta(row, mode))
    for row in aero["drag"]:
        mode = FlightMode.parse(row["mode"])
        drag[(mode, row["airspeed_mps"])] = DragFit(
            c0=row["c0"], c_alpha=row["c_alpha"], c_alpha2=row["c_alpha2"],
            meta=_meta(row, mode))
    for row in aero["form_drag"]:
        form_drag[row["airspeed_mps"]] = DragFit(
            c0=row["c0"], c_alpha=row["c_alpha"], c_alpha2=row["c_alpha2"],
            meta=_meta(row))
    for row in aero["quad_drag"]:
        mode = FlightMode.parse(row["mode"])
        quad_drag[(mode, row["airspeed_mps"], row["fit"])] = QuadDragFit(
            c0=row["c0"], c_alpha=row["c_alpha"], c_alpha2=row.get("c_alpha2"),
            form=row["fit"], meta=_meta(row, mode))
    for row in aero["pitch_moment"]:
        pitch[row["airspeed_mps"]] = PitchMomentFit(
            c0=row["c0"], c_alpha=row["c_alpha"], meta=_meta(row))
    for row in aero["pitch_elevator"]:
        elevator[row["airspeed_mps"]] = ElevatorMomentFit(
            c_de=row["c_de"], meta=_meta(row))
    for row in aero["diff_thrust_moment"]:
        mode = FlightMode.parse(row["mode"])
        diff_thrust[(mode, row["airspeed_mps"])] = DiffThrustMomentFit(
            c0=row["c0"], c_alpha=row["c_alpha"], c_alpha2=row["c_alpha2"],
            meta=_meta(row, mode))
    roll = {row["airspeed_mps"]: row for row in aero["roll_moment"]}
    yaw = {row["airspeed_mps"]: row for row in aero["yaw_moment"]}
    side = {row["airspeed_mps"]: row for row in aero["side_force"]}
    for b in sorted(side):
        lateral[b] = LateralModel(
            c_rm_da=roll[b]["c_da"], c_rm_dr=roll[b]["c_dr"],
            c_ym_da=yaw[b]["c_da"], c_ym_dr=yaw[b]["c_dr"],
            c_sf0=side[b]["c0"], c_sf_dr=side[b]["c_dr"],
            meta=_meta(side[b]))
    return AeroModel(lift=lift, drag=drag, form_drag=form_drag,
                     quad_drag=quad_drag, pitch=pitch, pitch_elevator=elevator,
                     diff_thrust=diff_thrust, lateral=lateral,
                     stall_boundary=stall_boundary)


@dataclass
class CoefficientDatabase:
    """Parsed database plus the domain objects built from it."""

    raw: dict
    geometry: VehicleGeometry
    atmosphere: Atmosphere
    thrust_map: ThrustMap
    aero_model: AeroModel
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientDatabase":
        if "schema_version" not in data:
            raise FormatError("database missing schema_version field")
        if data["schema_version"] != SCHEMA_VERSION:
            raise FormatError(f"unsupported database schema {data['schema_version']}")
        veh = data["vehicle"]
        geometry = VehicleGeometry.from_span_chord(
            span=veh["wing_span_m"], chord=veh["wing_chord_m"],
            oswald_e=veh["oswald_e"], incidence_deg=veh["incidence_deg"],
            quad_arm=veh["quad_arm_m"], mass=veh["mass_kg"])
        atm = data["atmosphere"]
        atmosphere = Atmosphere(density=atm["density_kgpm3"],
                                kinematic_viscosity=atm["kinematic_viscosity_m2ps"])
        thrust_map = ThrustMap.from_rows(data["thrust_map"])
        stall = {int(k): float(v) for k, v in data["stall_boundary_deg"].items()}
        aero_model = _build_aero_model(data["aero"], stall)

        warnings = []
        for (alpha_p, va), issues in thrust_map.validate().items():
            for issue in issues:
                warnings.append(f"thrust map ({alpha_p:g} deg, {va:g} m/s): {issue}")
        warnings.extend(f"aero suite: {w}" for w in aero_model.validate())
        return cls(raw=data, geometry=geometry, atmosphere=atmosphere,
                   thrust_map=thrust_map, aero_model=aero_model, warnings=warnings)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "CoefficientDatabase":
        """Load a database file; with no path, the packaged quadplane-v1."""
        if path is None:
            text = resources.files("quadplane.data").joinpath(DEFAULT_DB_NAME).read_text()
        else:
            text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"database is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.raw, indent=2, sort_keys=True) + "\n")

    def table_checksum(self) -> str:
        """SHA-256 over the canonical form of the shipped numeric sections."""
        payload = {k: self.raw[k] for k in _CHECKSUM_SECTIONS}
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    @property
    def provenance(self) -> dict:
        return self.raw.get("provenance", {})

    @property
    def name(self) -> str:
        return self.raw.get("name", "unnamed")


def database_from_models(geometry: VehicleGeometry, atmosphere: Atmosphere,
                         thrust_map: ThrustMap, aero_model: AeroModel,
                         source: str, name: str = "refit") -> dict:
    """Assemble a database dict from in-memory models (refit export path)."""

    def meta_fields(meta: FitMeta) -> dict:
        return {"re": meta.reynolds, "r2": meta.r_squared, "rmse": meta.rmse}

    aero: dict = {
        "lift": [], "drag": [], "form_drag": [], "quad_drag": [],
        "pitch_moment": [], "pitch_elevator": [], "diff_thrust_moment": [],
        "roll_moment": [], "yaw_moment": [], "side_force": [],
    }
    for (mode, b), fit in sorted(aero_model.lift.items(), key=lambda kv: (kv[0][1], kv[0][0].value)):
        aero["lift"].append({"mode": mode.value, "airspeed_mps": b, "c0": fit.c0,
                             "c_alpha": fit.c_alpha, **meta_fields(fit.meta)})
    for (mode, b), fit in sorted(aero_model.drag.items(), key=lambda kv: (kv[0][1], kv[0][0].value)):
        aero["drag"].append({"mode": mode.value, "airspeed_mps": b, "c0": fit.c0,
                             "c_alpha": fit.c_alpha, "c_alpha2": fit.c_alpha2,
                             **meta_fields(fit.meta)})
    for b, fit in sorted(aero_model.form_drag.items()):
        aero["form_drag"].append({"airspeed_mps": b, "c0": fit.c0,
                                  "c_alpha": fit.c_alpha, "c_alpha2": fit.c_alpha2,
                                  **meta_fields(fit.meta)})
    for (mode, b, form), fit in sorted(aero_model.quad_drag.items(),
                                       key=lambda kv: (kv[0][1], kv[0][0].value, kv[0][2])):
        aero["quad_drag"].append({"mode": mode.value, "airspeed_mps": b, "fit": form,
                                  "c0": fit.c0, "c_alpha": fit.c_alpha,
                                  "c_alpha2": fit.c_alpha2, **meta_fields(fit.meta)})
    for b, fit in sorted(aero_model.pitch.items()):
        aero["pitch_moment"].append({"airspeed_mps": b, "c0": fit.c0,
                                     "c_alpha": fit.c_alpha, **meta_fields(fit.meta)})
    for b, fit in sorted(aero_model.pitch_elevator.items()):
        aero["pitch_elevator"].append({"airspeed_mps": b, "c_de": fit.c_de,
                                       **meta_fields(fit.meta)})
    for (mode, b), fit in sorted(aero_model.diff_thrust.items(),
                                 key=lambda kv: (kv[0][1], kv[0][0].value)):
        aero["diff_thrust_moment"].append({"mode": mode.value, "airspeed_mps": b,
                                           "c0": fit.c0, "c_alpha": fit.c_alpha,
                                           "c_alpha2": fit.c_alpha2,
                                           **meta_fields(fit.meta)})
    for b, lat in sorted(aero_model.lateral.items()):
        common = {"airspeed_mps": b, "re": lat.meta.reynolds}
        aero["roll_moment"].append({**common, "c_da": lat.c_rm_da, "c_dr": lat.c_rm_dr,
                                    "r2_da": None, "rmse_da": None,
                                    "r2_dr": None, "rmse_dr": None})
        aero["yaw_moment"].append({**common, "c_da": lat.c_ym_da, "c_dr": lat.c_ym_dr,
                                   "r2_da": None, "rmse_da": None,
                                   "r2_dr": None, "rmse_dr": None})
        aero["side_force"].append({**common, "c0": lat.c_sf0, "c_dr": lat.c_sf_dr,
                                   "r2": lat.meta.r_squared, "rmse": lat.meta.rmse})

    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "provenance": {"source": source, "kind": "refit"},
        "vehicle": {
            "wing_span_m": geometry.wing_span,
            "wing_chord_m": geometry.wing_chord,
            "oswald_e": geometry.oswald_e,
            "incidence_deg": geometry.incidence_deg,
            "quad_arm_m": geometry.quad_arm,
            "mass_kg": geometry.mass,
        },
        "atmosphere": {
            "density_kgpm3": atmosphere.density,
            "kinematic_viscosity_m2ps": atmosphere.kinematic_viscosity,
        },
        "stall_boundary_deg": {str(k): v for k, v in sorted(aero_model.stall_boundary.items())},
        "alpha_fit_domain_deg": list(aero_model.alpha_domain),
        "thrust_map": [
            {"alpha_p_deg": a, "airspeed_mps": v, "c0": c.c0, "c1": c.c1,
             "c2": c.c2, "c3": c.c3, "r2": c.r_squared, "rmse": c.rmse}
            for (a, v), c in sorted(thrust_map.curves.items())
        ],
        "aero": aero,
    }
