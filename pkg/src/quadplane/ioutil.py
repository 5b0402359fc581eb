"""Deterministic output formatting shared by the CLI and service.

All emitted floats are rounded to 6 significant digits and JSON payloads use
sorted keys, so identical inputs produce byte-identical outputs (no
timestamps anywhere).
"""

from __future__ import annotations

import io
import json
import math


def sig6(x: float) -> float:
    if isinstance(x, bool) or not isinstance(x, float):
        return x
    if math.isnan(x) or math.isinf(x):
        return x
    return float(f"{x:.6g}")


def canonical(obj):
    """Recursively round floats for stable serialization."""
    if isinstance(obj, float):
        return sig6(obj)
    if isinstance(obj, dict):
        return {k: canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    """Render homogeneous dict rows as CSV with a stable column order."""
    if not rows:
        return ""
    if columns is None:
        columns = list(rows[0].keys())
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_cell(row.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def kv_to_csv(payload: dict, prefix: str = "") -> str:
    """Flatten a nested payload into key,value CSV lines."""
    lines: list[str] = []

    def walk(obj, path):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(obj[k], f"{path}.{k}" if path else str(k))
        elif isinstance(obj, (list, tuple)):
            for i, v in enumerate(obj):
                walk(v, f"{path}[{i}]")
        else:
            lines.append(f"{path},{_cell(obj)}")

    walk(canonical(payload), prefix)
    return "key,value\n" + "\n".join(lines) + "\n"
