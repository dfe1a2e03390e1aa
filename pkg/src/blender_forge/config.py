"""Line-based run configuration.

Grammar: section headers `[model]`, `[solver]`, `[blender]`, `[output]`;
`key = value` lines; `#` starts a comment; vectors are comma-separated
numbers.  Unknown sections or keys are errors with line numbers; missing
keys take the reference-model defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_affine import BlockAffineMap, Box, SplittingDims
from .cycle_model import SimpleCycle, StepCounts, validate
from .errors import ConfigError

_SECTIONS = ("model", "solver", "blender", "output")

_MODEL_KEYS = {
    "s": 1,
    "u": 1,
    "mu": 2.0,
    "lambda": 0.5,
    "y_plus": 1.0,
    "y_minus": -1.0,
    "x0": [1.0],
    "z0": [1.0],
    "a_s_diag": [0.25],
    "a_u_diag": [2.0],
    "b_s_diag": [0.5],
    "b_u_diag": [4.0],
    "tout_s_diag": [0.5],
    "tout_u_diag": [2.0],
    "tin_s_diag": [0.25],
    "tin_u_diag": [4.0],
    "chart_radius": 2.0,
    "v_radius": 0.25,
    "w_radius": 0.25,
    "segment_eps": 0.1,
    "l": 1,
    "r": 1,
}

_SOLVER_KEYS = {
    "eps": 0.01,
    "m_max": 40,
    "m": 0,  # 0 = take the solver's result
    "n": 0,
    "orbit_itinerary": "T_out,B,B,T_in,A",
    "orbit_start": "0,1,0",
    "orbit_chart": "P",
    "orbit_check_domains": "false",
    "homoclinic_tol": 1e-8,
    "homoclinic_max_steps": 200,
}

_BLENDER_KEYS = {
    "alpha_uu": 0.1,
    "alpha_cu": 0.1,
    "ratio": 10.0,
    "delta_c1": 1e-3,
    "samples": 100,
    "seed": 0,
    "k": 8,
    "max_depth": 120,
}

_OUTPUT_KEYS = {
    "dir": "out",
    "figures": "true",
}

_SCHEMAS = {
    "model": _MODEL_KEYS,
    "solver": _SOLVER_KEYS,
    "blender": _BLENDER_KEYS,
    "output": _OUTPUT_KEYS,
}


@dataclass(frozen=True)
class RunConfig:
    model: SimpleCycle
    solver: dict = field(default_factory=dict)
    blender: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    raw_model: dict = field(default_factory=dict)


def _parse_scalar(text: str, line_no: int):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_value(text: str, default, line_no: int):
    text = text.strip()
    if isinstance(default, list):
        return [
            float(_parse_scalar(part, line_no)) for part in text.split(",") if part.strip()
        ]
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int) and not isinstance(default, bool):
        v = _parse_scalar(text, line_no)
        if isinstance(v, float) and v != int(v):
            raise ConfigError(f"expected integer, got {text!r}", line=line_no)
        if isinstance(v, str):
            raise ConfigError(f"expected integer, got {text!r}", line=line_no)
        return int(v)
    if isinstance(default, float):
        v = _parse_scalar(text, line_no)
        if isinstance(v, str):
            raise ConfigError(f"expected number, got {text!r}", line=line_no)
        return float(v)
    return text


def _parse_sections(text: str) -> dict:
    sections = {name: dict(schema) for name, schema in _SCHEMAS.items()}
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise ConfigError(f"unknown section [{name}]", line=line_no)
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected `key = value`, got {raw.strip()!r}", line=line_no)
        if current is None:
            raise ConfigError("key outside any section", line=line_no)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        schema = _SCHEMAS[current]
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{current}]", line=line_no)
        sections[current][key] = _parse_value(value, schema[key], line_no)
    return sections


def build_model(m: dict) -> SimpleCycle:
    """Assemble a validated SimpleCycle from the [model] key set."""
    s, u = int(m["s"]), int(m["u"])
    dims = SplittingDims(s, u)

    def diag(key, size):
        vals = m[key]
        if len(vals) == 1 and size > 1:
            vals = vals * size
        if len(vals) != size:
            raise ConfigError(
                f"{key}: expected {size} diagonal entries, got {len(vals)}"
            )
        return np.diag(vals)

    y_plus, y_minus = float(m["y_plus"]), float(m["y_minus"])
    x0 = np.asarray(m["x0"], dtype=float)
    z0 = np.asarray(m["z0"], dtype=float)
    if x0.shape != (s,) or z0.shape != (u,):
        raise ConfigError("x0/z0 lengths must match the splitting dimensions")
    A = BlockAffineMap("P", "P", diag("a_s_diag", s), float(m["mu"]), diag("a_u_diag", u))
    B = BlockAffineMap("Q", "Q", diag("b_s_diag", s), float(m["lambda"]), diag("b_u_diag", u))
    T_out = BlockAffineMap(
        "P", "Q", diag("tout_s_diag", s), 1.0, diag("tout_u_diag", u), by=y_minus - y_plus
    )
    U_tin = diag("tin_u_diag", u)
    T_in = BlockAffineMap(
        "Q", "P", diag("tin_s_diag", s), 1.0, U_tin, bx=x0, bz=-(U_tin @ z0)
    )
    chart_r = float(m["chart_radius"])
    zeros = np.zeros(s + 1 + u)
    U_P = Box.from_center_radius("P", zeros, chart_r, "U_P")
    U_Q = Box.from_center_radius("Q", zeros, chart_r, "U_Q")
    v_center = np.concatenate([np.zeros(s), [0.0], z0])
    w_center = np.concatenate([np.zeros(s), [y_plus], np.zeros(u)])
    V = Box.from_center_radius("Q", v_center, float(m["v_radius"]), "V")
    W = Box.from_center_radius("P", w_center, float(m["w_radius"]), "W")
    cycle = SimpleCycle(
        dims=dims,
        A=A,
        B=B,
        T_out=T_out,
        T_in=T_in,
        y_plus=y_plus,
        y_minus=y_minus,
        z0=z0,
        x0=x0,
        U_P=U_P,
        U_Q=U_Q,
        V=V,
        W=W,
        steps=StepCounts(int(m["l"]), int(m["r"])),
        segment_eps=float(m["segment_eps"]),
    )
    report = validate(cycle)
    if not report.passed:
        raise ConfigError(
            "model invariants failed:\n"
            + "\n".join(str(c) for c in report.failures())
        )
    return cycle


def parse_config(text: str) -> RunConfig:
    sections = _parse_sections(text)
    model = build_model(sections["model"])
    return RunConfig(
        model=model,
        solver=sections["solver"],
        blender=sections["blender"],
        output=sections["output"],
        raw_model=sections["model"],
    )
