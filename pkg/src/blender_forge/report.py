"""Machine-readable key-value reports and CSV orbit traces.

Reports are flat documents of `dotted.key = value` lines.  Floats are
printed with 17 significant digits so that parse(emit(x)) == x exactly;
emission order is insertion order, making reports byte-reproducible.
"""

from __future__ import annotations

import csv
import io

import numpy as np


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple, np.ndarray)):
        for i, v in enumerate(np.asarray(value).reshape(-1) if isinstance(value, np.ndarray) else value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = value


def emit_kv(data: dict) -> str:
    flat: dict = {}
    _flatten("", data, flat)
    lines = []
    for key, value in flat.items():
        if isinstance(value, (bool, np.bool_, int, np.integer, float, np.floating)):
            lines.append(f"{key} = {format_number(value)}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_kv(text: str) -> dict:
    out: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if value in ("true", "false"):
            out[key] = value == "true"
            continue
        try:
            out[key] = int(value)
            continue
        except ValueError:
            pass
        try:
            out[key] = float(value)
            continue
        except ValueError:
            pass
        out[key] = value
    return out


def emit_trace_csv(trace) -> str:
    """Orbit trace as CSV: step, chart, x..., y, z...."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if not trace:
        writer.writerow(["step", "chart", "y"])
        return buf.getvalue()
    dims = trace[0].dims
    header = (
        ["step", "chart"]
        + [f"x{i}" for i in range(dims.s)]
        + ["y"]
        + [f"z{j}" for j in range(dims.u)]
    )
    writer.writerow(header)
    for step, p in enumerate(trace):
        writer.writerow(
            [step, p.chart]
            + [format_number(v) for v in p.x]
            + [format_number(p.y)]
            + [format_number(v) for v in p.z]
        )
    return buf.getvalue()
