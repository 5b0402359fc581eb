"""Batch command-line client for the quadplane model suite.

The CLI is a thin front end over the service layer: every verb builds the
same pydantic request a service client would send and either executes it
in-process (default) or POSTs it to a running server (``--server URL``).
Outputs are deterministic: floats at 6 significant digits, sorted JSON keys,
no timestamps.

Exit codes: 0 success; 1 domain/infeasibility error (machine-readable JSON on
stdout); 2 ``--strict`` and the result carries an infeasible entry.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .db import CoefficientDatabase
from .exceptions import QuadplaneError
from .ioutil import dump_json, kv_to_csv, rows_to_csv
from .service import handlers
from .service import schemas as s

DB_ENV_VAR = "QUADPLANE_DB"

_ENDPOINTS = {
    "eval": ("/eval", s.EvalRequest, handlers.handle_eval),
    "thrust": ("/thrust", s.ThrustRequest, handlers.handle_thrust),
    "trim": ("/trim", s.TrimRequest, handlers.handle_trim),
    "transition": ("/transition", s.TransitionRequest, handlers.handle_transition),
    "envelope": ("/envelope", s.EnvelopeRequest, handlers.handle_envelope),
    "mesh": ("/mesh", s.MeshRequest, handlers.handle_mesh),
    "reduce": ("/reduce", s.ReduceRequest, handlers.handle_reduce),
    "fit": ("/fit", s.FitRequest, handlers.handle_fit),
}

# verbs whose natural CSV form is one row per entry of this field
_TABULAR = {
    "transition": "entries",
    "envelope": "cells",
    "mesh": "triangles",
    "reduce": "points",
}


def _execute(args, verb: str, request) -> dict:
    endpoint, _, handler = _ENDPOINTS[verb]
    if args.server:
        import httpx
        resp = httpx.post(args.server.rstrip("/") + endpoint,
                          json=request.model_dump(), timeout=120.0)
        payload = resp.json()
        if resp.status_code >= 400:
            raise _RemoteError(payload)
        return payload
    db = CoefficientDatabase.load(args.db)
    return handler(db, request).model_dump()


class _RemoteError(Exception):
    def __init__(self, payload: dict):
        super().__init__("remote error")
        self.payload = payload


def _flatten_row(entry: dict) -> dict:
    flat = {}
    for k, v in entry.items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                flat[f"{k}.{kk}"] = vv
        elif isinstance(v, (list, tuple)):
            flat[k] = ";".join(str(x) for x in v)
        else:
            flat[k] = v
    return flat


def _render(verb: str, payload: dict, fmt: str) -> str:
    if fmt == "json":
        return dump_json(payload)
    field = _TABULAR.get(verb)
    if field and isinstance(payload.get(field), list) and payload[field]:
        rows = [_flatten_row(e) for e in payload[field]]
        columns = sorted({c for r in rows for c in r},
                         key=lambda c: (c not in rows[0], c))
        return rows_to_csv(rows, list(columns))
    return kv_to_csv(payload)


def _has_infeasibility(payload) -> bool:
    if isinstance(payload, dict):
        if payload.get("feasible") is False:
            return True
        return any(_has_infeasibility(v) for v in payload.values())
    if isinstance(payload, list):
        return any(_has_infeasibility(v) for v in payload)
    return False


def _emit(args, verb: str, payload: dict) -> int:
    text = _render(verb, payload, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.strict and _has_infeasibility(payload):
        return 2
    return 0


def _load_config_defaults(argv: list[str]) -> dict:
    if "--config" not in argv:
        return {}
    path = argv[argv.index("--config") + 1]
    return json.loads(Path(path).read_text())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadplane",
        description="Evaluate, fit, reduce and trim the QuadPlane model suite.")
    ap.add_argument("--db", default=os.environ.get(DB_ENV_VAR),
                    help="coefficient database JSON (default: packaged quadplane-v1, "
                         f"or ${DB_ENV_VAR})")
    ap.add_argument("--server", help="base URL of a running service; the CLI "
                                     "then acts as a remote client")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--strict", action="store_true",
                    help="exit 2 when any result entry is infeasible")
    ap.add_argument("--output", "-o", help="write output to a file instead of stdout")
    ap.add_argument("--config", help="JSON file with default flag values")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="evaluate coefficients and the net wrench")
    p.add_argument("--mode", required=True, choices=("quad", "hybrid", "plane"))
    p.add_argument("--alpha", type=float, required=True, help="vehicle alpha (deg)")
    p.add_argument("--v", type=float, required=True, help="airspeed (m/s)")
    p.add_argument("--nu-fwd", type=float, default=1000)
    p.add_argument("--nu-quad", type=float, default=1000)
    p.add_argument("--aileron", type=float, default=0)
    p.add_argument("--elevator", type=float, default=0)
    p.add_argument("--rudder", type=float, default=0)
    p.add_argument("--interp", action="store_true",
                   help="use mesh interpolation instead of bucket snapping")
    p.add_argument("--quad-drag-fit", choices=("linear", "quadratic"),
                   default="linear")

    p = sub.add_parser("thrust", help="dynamic thrust of one propulsion module")
    p.add_argument("--alpha-p", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)

    p = sub.add_parser("trim", help="steady level-flight trim")
    p.add_argument("--mode", required=True, choices=("quad", "hybrid", "plane"))
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None,
                   help="held alpha for hybrid mode (deg)")
    p.add_argument("--pitch-policy", choices=("elevator", "elevator-only"),
                   default="elevator")

    p = sub.add_parser("transition", help="quasi-static transition schedule")
    p.add_argument("--from", dest="v_from", type=float, required=True)
    p.add_argument("--to", dest="v_to", type=float, required=True)
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--alpha-policy", type=float, default=5.0)

    p = sub.add_parser("envelope", help="feasibility map over (alpha, V)")
    p.add_argument("--mode", required=True, choices=("quad", "hybrid", "plane"))
    p.add_argument("--alpha-grid", default="-5,0,5,10",
                   help="comma-separated alphas (deg)")
    p.add_argument("--va-grid", default="5,11,15",
                   help="comma-separated airspeeds (m/s)")

    p = sub.add_parser("mesh", help="export a coefficient interpolation mesh")
    p.add_argument("--mode", required=True, choices=("quad", "hybrid", "plane"))
    p.add_argument("--coefficient", required=True,
                   choices=("lift", "drag_plane", "drag_quad", "form_drag",
                            "pitch_moment", "diff_thrust"))

    p = sub.add_parser("reduce", help="reduce a tunnel log into aerodynamic points")
    p.add_argument("log", help="CSV log file")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--schedule", help="JSON schedule file (default: built-in sequence)")
    p.add_argument("--offset", action="append", default=[],
                   metavar="CHANNEL=NEWTONS",
                   help="calibration offset, e.g. fz=16.5 (repeatable)")
    p.add_argument("--split-moment", action="store_true",
                   help="attribute half the pitching moment per rear motor")

    p = sub.add_parser("fit", help="refit models from sample files")
    p.add_argument("--thrust-samples",
                   help="CSV with alpha_p_deg,airspeed_mps,esc_us,thrust_N")
    p.add_argument("--suite-samples", help="JSON list of suite sample points")
    p.add_argument("--reduced", help="JSON reduce output (or list of points)")
    p.add_argument("--source", default="cli-fit", help="provenance tag")

    p = sub.add_parser("plot", help="render SVG+CSV plot data")
    p.add_argument("--kind", required=True,
                   choices=("lift", "drag", "thrust", "reduced"))
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--bucket", type=int, default=11, choices=(5, 11, 15))
    p.add_argument("--alpha-p", type=float, default=0.0)
    p.add_argument("--input", help="reduce output JSON (kind=reduced)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return ap


def _grid(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _build_request(args):
    if args.verb == "eval":
        return s.EvalRequest(
            mode=args.mode, alpha_deg=args.alpha, airspeed_mps=args.v,
            esc_fwd_us=args.nu_fwd, esc_quad_us=args.nu_quad,
            aileron=args.aileron, elevator=args.elevator, rudder=args.rudder,
            interp=args.interp, quad_drag_fit=args.quad_drag_fit)
    if args.verb == "thrust":
        return s.ThrustRequest(alpha_p_deg=args.alpha_p, airspeed_mps=args.v,
                               esc_us=args.nu)
    if args.verb == "trim":
        return s.TrimRequest(mode=args.mode, airspeed_mps=args.v,
                             alpha_deg=args.alpha, pitch_policy=args.pitch_policy,
                             strict=False)
    if args.verb == "transition":
        return s.TransitionRequest(v_from_mps=args.v_from, v_to_mps=args.v_to,
                                   steps=args.steps,
                                   alpha_policy_deg=args.alpha_policy)
    if args.verb == "envelope":
        return s.EnvelopeRequest(mode=args.mode,
                                 alpha_grid_deg=_grid(args.alpha_grid),
                                 va_grid_mps=_grid(args.va_grid))
    if args.verb == "mesh":
        return s.MeshRequest(mode=args.mode, coefficient=args.coefficient)
    if args.verb == "reduce":
        offsets = {}
        for spec_ in args.offset:
            channel, _, value = spec_.partition("=")
            offsets[channel.strip().lower()] = float(value)
        schedule = None
        if args.schedule:
            rows = json.loads(Path(args.schedule).read_text())
            schedule = [s.ScheduleRow(**r) for r in rows]
        return s.ReduceRequest(csv_text=Path(args.log).read_text(),
                               alpha_deg=args.alpha, airspeed_mps=args.v,
                               offsets=offsets, schedule=schedule,
                               split_moment=args.split_moment)
    if args.verb == "fit":
        thrust_samples = None
        if args.thrust_samples:
            lines = Path(args.thrust_samples).read_text().strip().splitlines()
            start = 1 if lines and lines[0].lower().startswith("alpha") else 0
            thrust_samples = [[float(x) for x in ln.split(",")]
                              for ln in lines[start:] if ln.strip()]
        suite_points = None
        if args.suite_samples:
            suite_points = [s.SuitePointModel(**p)
                            for p in json.loads(Path(args.suite_samples).read_text())]
        reduced_points = None
        if args.reduced:
            data = json.loads(Path(args.reduced).read_text())
            entries = data["points"] if isinstance(data, dict) else data
            reduced_points = [s.ReducedPointModel(**p) for p in entries]
        return s.FitRequest(thrust_samples=thrust_samples,
                            suite_points=suite_points,
                            reduced_points=reduced_points, source=args.source)
    raise QuadplaneError(f"no request builder for verb {args.verb!r}")


def _run_plot(args) -> int:
    from . import plotting
    db = CoefficientDatabase.load(args.db)
    out = Path(args.out)
    if args.kind in ("lift", "drag"):
        written = plotting.plot_coefficient(db, args.kind, args.bucket, out)
    elif args.kind == "thrust":
        written = plotting.plot_thrust(db, args.alpha_p, out)
    else:
        if not args.input:
            raise QuadplaneError("plot --kind reduced requires --input")
        data = json.loads(Path(args.input).read_text())
        points = data["points"] if isinstance(data, dict) else data
        written = plotting.plot_reduced(points, out)
    sys.stdout.write(dump_json({"written": written}))
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _load_config_defaults(argv)
    except (OSError, json.JSONDecodeError, IndexError) as exc:
        sys.stdout.write(dump_json({"error": {"type": "ConfigError",
                                              "message": str(exc)}}))
        return 1
    if defaults:
        parser.set_defaults(**defaults)
    args = parser.parse_args(argv)

    try:
        if args.verb == "plot":
            return _run_plot(args)
        if args.verb == "serve":
            import uvicorn
            from .service import create_app
            uvicorn.run(create_app(args.db), host=args.host, port=args.port)
            return 0
        request = _build_request(args)
        payload = _execute(args, args.verb, request)
        return _emit(args, args.verb, payload)
    except _RemoteError as exc:
        sys.stdout.write(dump_json(exc.payload))
        return 1
    except QuadplaneError as exc:
        sys.stdout.write(dump_json({"error": {
            "type": type(exc).__name__,
            "reason": getattr(exc, "reason", "error"),
            "message": str(exc),
            "detail": getattr(exc, "detail", {}) or {},
        }}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
