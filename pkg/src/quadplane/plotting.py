"""Static plot generation (SVG plus a CSV of the plotted series).

SVG output is made reproducible: fixed hash salt, no embedded date.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import FlightMode  # noqa: E402
from .db import CoefficientDatabase  # noqa: E402
from .ioutil import rows_to_csv  # noqa: E402

plt.rcParams["svg.hashsalt"] = "quadplane"

_MODES = (FlightMode.QUAD, FlightMode.HYBRID, FlightMode.PLANE)


def _save(fig, out: Path, rows: list[dict], columns: list[str]) -> list[str]:
    out = Path(out)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    csv_path = out.with_suffix(".csv")
    csv_path.write_text(rows_to_csv(rows, columns))
    return [str(out), str(csv_path)]


def _alpha_sweep(bound: float, n: int = 31) -> list[float]:
    return [-5.0 + (bound + 5.0) * i / (n - 1) for i in range(n)]


def plot_coefficient(db: CoefficientDatabase, kind: str, bucket: int,
                     out: Path) -> list[str]:
    """Lift or drag coefficient versus alpha for all modes at one bucket."""
    model = db.aero_model
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = []
    for mode in _MODES:
        if kind == "lift":
            bound = model.stall_boundary[bucket]
            alphas = _alpha_sweep(bound)
            ys = [model.c_lift(mode, bucket, a) for a in alphas]
            label = "C_L"
        else:
            alphas = _alpha_sweep(model.alpha_domain[1])
            ys = [model.c_drag_plane(mode, bucket, a) for a in alphas]
            label = "C_D"
        ax.plot(alphas, ys, label=mode.value)
        rows += [{"mode": mode.value, "alpha_deg": a, label: y}
                 for a, y in zip(alphas, ys)]
    ax.set_xlabel("vehicle angle of attack (deg)")
    ax.set_ylabel(f"{label} at {bucket} m/s")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, out, rows, ["mode", "alpha_deg", label])


def plot_thrust(db: CoefficientDatabase, alpha_p: float, out: Path) -> list[str]:
    """Dynamic thrust versus ESC signal at each tested airspeed."""
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = []
    escs = [1000 + 25 * i for i in range(41)]
    for va in (0.0, 5.0, 11.0, 15.0):
        ts = [db.thrust_map.thrust(alpha_p, va, nu) for nu in escs]
        ax.plot(escs, ts, label=f"{va:g} m/s")
        rows += [{"airspeed_mps": va, "esc_us": float(nu), "thrust_N": t}
                 for nu, t in zip(escs, ts)]
    ax.set_xlabel("ESC signal (us)")
    ax.set_ylabel(f"thrust (N) at alpha_p = {alpha_p:g} deg")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, out, rows, ["airspeed_mps", "esc_us", "thrust_N"])


def plot_reduced(points: list[dict], out: Path) -> list[str]:
    """Reduced lift and drag versus alpha with one-sigma error bars."""
    fig, (ax_l, ax_d) = plt.subplots(1, 2, figsize=(10, 4))
    rows = []
    mode_points: dict[str, list[dict]] = {}
    for p in points:
        if p["label"] in ("quad", "hybrid", "plane"):
            mode_points.setdefault(p["mode"], []).append(p)
    for mode, pts in sorted(mode_points.items()):
        pts = sorted(pts, key=lambda p: p["alpha_deg"])
        alphas = [p["alpha_deg"] for p in pts]
        ax_l.errorbar(alphas, [p["lift_N"] for p in pts],
                      yerr=[p["sigma_lift_N"] for p in pts],
                      marker="*", capsize=3, label=mode)
        ax_d.errorbar(alphas, [p["drag_N"] for p in pts],
                      yerr=[p["sigma_drag_N"] for p in pts],
                      marker="*", capsize=3, label=mode)
        rows += [{"mode": mode, "alpha_deg": p["alpha_deg"],
                  "lift_N": p["lift_N"], "sigma_lift_N": p["sigma_lift_N"],
                  "drag_N": p["drag_N"], "sigma_drag_N": p["sigma_drag_N"]}
                 for p in pts]
    for ax, name in ((ax_l, "lift (N)"), (ax_d, "drag (N)")):
        ax.set_xlabel("vehicle angle of attack (deg)")
        ax.set_ylabel(name)
        ax.legend()
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, out, rows, ["mode", "alpha_deg", "lift_N", "sigma_lift_N",
                                  "drag_N", "sigma_drag_N"])
