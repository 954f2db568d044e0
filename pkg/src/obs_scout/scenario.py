"""JSON scenario files: schema, defaults, validation and conversion to model objects.

Angles in scenario files are degrees (heading, turn rates, angular sensor
noise, heading entries of EKF noise); everything is converted to radians
when model objects are built.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .dynamics import SegmentPlan, TrajectoryPlan
from .sensors import SensorKind, SensorSpec


class ScenarioError(Exception):
    """Invalid scenario; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec5_nonneg = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 5, "maxItems": 5}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "plan", "sensors"],
    "properties": {
        "model": {"enum": ["unicycle", "dubins"]},
        "plan": {
            "type": "object",
            "additionalProperties": False,
            "required": ["initial", "speed", "segments"],
            "properties": {
                "initial": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["p1", "p2", "theta_deg", "c1", "c2"],
                    "properties": {k: _num for k in ("p1", "p2", "theta_deg", "c1", "c2")},
                },
                "speed": {"type": "number", "minimum": 0},
                "dt": _pos,
                "segments": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "duration"],
                        "properties": {
                            "kind": {"enum": ["line", "arc"]},
                            "duration": _pos,
                            "turn_rate_deg": _num,
                        },
                        "if": {"properties": {"kind": {"const": "arc"}}},
                        "then": {
                            "required": ["turn_rate_deg"],
                            "properties": {"turn_rate_deg": {"not": {"const": 0}}},
                        },
                        "else": {"properties": {"turn_rate_deg": {"const": 0}}},
                    },
                },
            },
        },
        "sensors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in SensorKind]},
                    "sigma": _pos,
                    "beacon": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "epsilon": _pos,
        "K": {"type": "integer", "minimum": 1},
        "solver": {"enum": ["exhaustive", "greedy", "relaxed"]},
        "relaxed_iters": {"type": "integer", "minimum": 1},
        "rank": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["no_control", "turn_active", "speed_varying"]},
                "depth": {"type": "integer", "minimum": 1},
            },
        },
        "ekf": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "q_diag": _vec5_nonneg,
                "init_std": {"type": "array", "items": _pos, "minItems": 5, "maxItems": 5},
                "dt_meas": _pos,
                "n_trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "naive_sensor": {"type": "string"},
            },
        },
        "output": {"type": "string"},
    },
}

# sensor noise defaults in file units (m, or degrees for angular sensors)
SIGMA_DEFAULTS = {"gps": 2.0, "magnetometer": 12.0, "range": 1.0, "bearing": 5.0}

DEFAULTS = {
    "epsilon": 0.01,
    "K": 4,
    "solver": "exhaustive",
    "relaxed_iters": 500,
    "rank": {"mode": "no_control", "depth": 4},
    "ekf": {
        # per-second process noise; the heading entry is deg^2
        "q_diag": [1e-6, 1e-6, float(np.rad2deg(1.0) ** 2 * 1e-8), 1e-8, 1e-8],
        "init_std": [2.0, 2.0, 12.0, 0.5, 0.5],
        "dt_meas": 0.1,
        "n_trials": 100,
        "seed": 0,
    },
    "output": "out",
}


@dataclass
class Scenario:
    """Validated scenario in file units; ``data`` is the normalized JSON form."""

    data: dict

    @property
    def model(self) -> str:
        return self.data["model"]

    @property
    def epsilon(self) -> float:
        return float(self.data["epsilon"])

    @property
    def K(self) -> int:
        return int(self.data["K"])

    @property
    def solver(self) -> str:
        return self.data["solver"]

    @property
    def output(self) -> str:
        return self.data["output"]

    def plan(self) -> TrajectoryPlan:
        p = self.data["plan"]
        ini = p["initial"]
        x0 = [ini["p1"], ini["p2"], np.deg2rad(ini["theta_deg"]), ini["c1"], ini["c2"]]
        segs = [
            SegmentPlan(s["kind"], float(s["duration"]), float(np.deg2rad(s.get("turn_rate_deg", 0.0))))
            for s in p["segments"]
        ]
        return TrajectoryPlan(np.array(x0, dtype=float), float(p["speed"]), segs, float(p["dt"]))

    def sensors(self) -> list[SensorSpec]:
        out = []
        for s in self.data["sensors"]:
            sigma = float(s["sigma"])
            if s["kind"] in ("magnetometer", "bearing"):
                sigma = float(np.deg2rad(sigma))
            beacon = tuple(s["beacon"]) if "beacon" in s else None
            out.append(SensorSpec(s["id"], SensorKind(s["kind"]), sigma, beacon))
        return out

    def ekf_q(self) -> np.ndarray:
        q = np.array(self.data["ekf"]["q_diag"], dtype=float)
        q[2] *= np.deg2rad(1.0) ** 2
        return np.diag(q)

    def ekf_init_cov(self) -> np.ndarray:
        s = np.array(self.data["ekf"]["init_std"], dtype=float)
        s[2] = np.deg2rad(s[2])
        return np.diag(s**2)

    def naive_sensor_index(self) -> int:
        name = self.data["ekf"].get("naive_sensor")
        ids = [s["id"] for s in self.data["sensors"]]
        if name is None:
            kinds = [s["kind"] for s in self.data["sensors"]]
            return kinds.index("gps") if "gps" in kinds else 0
        return ids.index(name)

    def dumps(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _fill_defaults(data: dict) -> dict:
    out = copy.deepcopy(data)
    for key, val in DEFAULTS.items():
        if isinstance(val, dict):
            block = out.setdefault(key, {})
            for k, v in val.items():
                block.setdefault(k, copy.deepcopy(v))
        else:
            out.setdefault(key, val)
    out["plan"].setdefault("dt", 1e-3)
    for seg in out["plan"]["segments"]:
        seg.setdefault("turn_rate_deg", 0.0)
    for s in out["sensors"]:
        s.setdefault("sigma", SIGMA_DEFAULTS[s["kind"]])
    return out


def validate(data) -> Scenario:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(err.message, _pointer(err.absolute_path))
    data = _fill_defaults(data)

    for i, s in enumerate(data["sensors"]):
        needs = s["kind"] in ("range", "bearing")
        if needs and "beacon" not in s:
            raise ScenarioError(f"{s['kind']} sensor needs a beacon", f"/sensors/{i}")
        if not needs and "beacon" in s:
            raise ScenarioError(f"{s['kind']} sensor takes no beacon", f"/sensors/{i}/beacon")
    ids = [s["id"] for s in data["sensors"]]
    if len(set(ids)) != len(ids):
        raise ScenarioError("sensor ids must be unique", "/sensors")
    naive = data["ekf"].get("naive_sensor")
    if naive is not None and naive not in ids:
        raise ScenarioError(f"unknown sensor id {naive!r}", "/ekf/naive_sensor")
    durations = [s["duration"] for s in data["plan"]["segments"]]
    if data["plan"]["dt"] > min(durations):
        raise ScenarioError("dt must not exceed the shortest segment duration", "/plan/dt")
    if data["model"] == "dubins" and not data["plan"]["speed"] > 0:
        raise ScenarioError("dubins plans need a positive speed", "/plan/speed")
    if data["model"] == "dubins" and data["rank"]["mode"] == "speed_varying":
        raise ScenarioError("speed_varying needs the unicycle model", "/rank/mode")
    return Scenario(data)


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"JSON parse error at line {err.lineno}, column {err.colno}: {err.msg}") from None
    return validate(data)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise ScenarioError(f"cannot read {path}: {err}") from None
    return loads(text)
