"""Observability codistribution and the rank test, plus the lemma scenario corpus."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import jets
from .dynamics import vector_fields
from .sensors import SensorSpec, jet_measure

RANK_TOL = 1e-8
DEFAULT_STATE_SEED = 20240611
DEFAULT_DEPTH = 4


class Model(str, Enum):
    UNICYCLE = "unicycle"
    DUBINS = "dubins"


class ControlMode(str, Enum):
    NO_CONTROL = "no_control"
    TURN_ACTIVE = "turn_active"
    SPEED_VARYING = "speed_varying"


@dataclass
class RankReport:
    rank: int
    tolerance: float
    singular_values: np.ndarray
    null_space: list[np.ndarray]
    depth: int

    @property
    def verdict(self) -> str:
        return "Observable" if self.rank == 5 else "Unobservable"

    @property
    def observable(self) -> bool:
        return self.rank == 5

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "tolerance": self.tolerance,
            "singular_values": [float(s) for s in self.singular_values],
            "null_space": [[float(v) for v in n] for n in self.null_space],
            "verdict": self.verdict,
            "lie_depth": self.depth,
        }


# A measurement channel maps a list of five state jets to one scalar jet.
Channel = Callable[[list], jets.Jet]


def sensor_channels(sensors: Sequence[SensorSpec]) -> list[Channel]:
    out = []
    for spec in sensors:
        for j in range(spec.n_channels):
            out.append(lambda x, spec=spec, j=j: jet_measure(spec, x)[j])
    return out


def build_codistribution(
    model: Model | str,
    channels: Sequence[Channel | SensorSpec],
    mode: ControlMode | str,
    state,
    depth: int = DEFAULT_DEPTH,
    speed: float = 1.0,
    order: int | None = None,
) -> np.ndarray:
    """Gradients of h, L^k h along the drift, and L_fi L^k h for the active input field.

    ``speed`` is the constant forward speed folded into the drift.  For the
    unicycle model it is the nominal u1 (0 means the vehicle is parked).
    """
    model, mode = Model(model), ControlMode(mode)
    if model is Model.DUBINS and mode is ControlMode.SPEED_VARYING:
        raise ValueError("the Dubins model has constant speed; speed_varying needs the unicycle model")
    if order is None:
        order = max(jets.DEFAULT_ORDER, depth + 1)
    if depth > order - 1:
        raise jets.JetOrderError(f"depth {depth} needs seed order >= {depth + 1}, got {order}")

    resolved: list[Channel] = []
    for ch in channels:
        if isinstance(ch, SensorSpec):
            resolved.extend(sensor_channels([ch]))
        else:
            resolved.append(ch)

    x = jets.seed(state, order)
    f0, f1, f2 = vector_fields(x, speed)
    extra = {ControlMode.TURN_ACTIVE: f2, ControlMode.SPEED_VARYING: f1}.get(mode)

    rows = []
    for ch in resolved:
        g = ch(x)
        if not isinstance(g, jets.Jet):
            g = jets.Jet.constant(float(g), order)
        rows.append(g.gradient())
        for k in range(depth):
            if extra is not None:
                rows.append(jets.lie(g, extra).gradient())
            g = jets.lie(g, f0)
            rows.append(g.gradient())
    return np.array(rows)


def numerical_rank(matrix, tol_rel: float = RANK_TOL, depth: int = -1) -> RankReport:
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    if A.size == 0:
        raise ValueError("empty matrix")
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    sv = np.zeros(A.shape[1])
    sv[: len(s)] = s
    smax = sv[0]
    rank = 0 if smax == 0 else int(np.sum(sv > tol_rel * smax))
    null = [vt[i] for i in range(rank, A.shape[1])]
    return RankReport(rank, tol_rel, sv, null, depth)


def observability_rank(model, channels, mode, state, depth: int = DEFAULT_DEPTH, speed: float = 1.0,
                       tol_rel: float = RANK_TOL) -> RankReport:
    A = build_codistribution(model, channels, mode, state, depth=depth, speed=speed)
    return numerical_rank(A, tol_rel, depth)


# -- lemma corpus ---------------------------------------------------------

BEACON_A = (3.0, -7.0)
BEACON_B = (-6.0, 4.0)


def _p1(x):
    return x[0]


def _p2(x):
    return x[1]


def _theta(x):
    return x[2]


def _range_a(x):
    return jets.sqrt((x[0] - BEACON_A[0]) ** 2 + (x[1] - BEACON_A[1]) ** 2)


def _range_b(x):
    return jets.sqrt((x[0] - BEACON_B[0]) ** 2 + (x[1] - BEACON_B[1]) ** 2)


def _bearing_a(x):
    return jets.atan2(x[1] - BEACON_A[1], x[0] - BEACON_A[0]) - x[2]


@dataclass
class LemmaScenario:
    name: str
    description: str
    model: Model
    mode: ControlMode
    channels: list
    expected: str | None  # None: probe only, recorded without a verdict
    speed: float = 1.0


@dataclass
class LemmaResult:
    scenario: LemmaScenario
    ranks: list[int]
    min_singular: float
    actual: str
    passed: bool | None
    states: np.ndarray = field(repr=False, default=None)


def lemma_corpus() -> list[LemmaScenario]:
    D, U = Model.DUBINS, Model.UNICYCLE
    NC, TA, SV = ControlMode.NO_CONTROL, ControlMode.TURN_ACTIVE, ControlMode.SPEED_VARYING
    unobs, obs = "Unobservable", "Observable"
    return [
        LemmaScenario("heading_only", "h = theta only, no position", D, NC, [_theta], unobs),
        LemmaScenario("heading_only_turning", "h = theta only, turn active", D, TA, [_theta], unobs),
        LemmaScenario("parked_unicycle_position", "unicycle with u1 = 0, h = (p1, p2) without theta",
                      U, NC, [_p1, _p2], unobs, speed=0.0),
        LemmaScenario("single_linear_output", "single h = p1, no control", D, NC, [_p1], unobs),
        LemmaScenario("single_cubic_output", "single h = p1 + p2^3 (zero 4th derivatives), no control",
                      D, NC, [lambda x: x[0] + x[1] ** 3], unobs),
        LemmaScenario("single_quartic_probe", "single h = p1^4 + p2, no control (recorded only)",
                      D, NC, [lambda x: x[0] ** 4 + x[1]], None),
        LemmaScenario("position_range_no_heading", "h = (p1, p2, range) without theta, no control",
                      D, NC, [_p1, _p2, _range_a], unobs),
        LemmaScenario("two_linear_outputs", "h1 = p1, h2 = p2, no control", D, NC, [_p1, _p2], unobs),
        LemmaScenario("two_mixed_linear_outputs", "h1 = p1 + 2 p2, h2 = p2 - p1, no control",
                      D, NC, [lambda x: x[0] + 2 * x[1], lambda x: x[1] - x[0]], unobs),
        LemmaScenario("quadratic_and_heading", "h1 = p1^2 + p2 (zero 3rd derivatives), h2 = theta, no control",
                      D, NC, [lambda x: x[0] ** 2 + x[1], _theta], unobs),
        LemmaScenario("two_ranges_no_heading", "h = (range A, range B), no control",
                      D, NC, [_range_a, _range_b], unobs),
        LemmaScenario("gps_and_heading", "h = (p1, p2, theta), no control", D, NC, [_p1, _p2, _theta], obs),
        LemmaScenario("two_ranges_and_bearing", "h = (range A, range B, bearing A), no control",
                      D, NC, [_range_a, _range_b, _bearing_a], obs),
        LemmaScenario("dubins_turning_gps", "Dubins, u2 != 0, h = (p1, p2)", D, TA, [_p1, _p2], obs),
        LemmaScenario("unicycle_speed_varying_gps", "unicycle, u1 = u1(t), h = (p1, p2)", U, SV, [_p1, _p2], obs),
    ]


def sample_states(n: int, seed: int = DEFAULT_STATE_SEED, avoid=(BEACON_A, BEACON_B), min_dist: float = 0.5) -> np.ndarray:
    """Random states: p in [-10, 10]^2, theta in (-pi, pi], c in [-1, 1]^2, away from beacons."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x = np.array([
            rng.uniform(-10, 10), rng.uniform(-10, 10),
            -rng.uniform(-np.pi, np.pi), rng.uniform(-1, 1), rng.uniform(-1, 1),
        ])
        if all(np.hypot(x[0] - b[0], x[1] - b[1]) > min_dist for b in avoid):
            out.append(x)
    return np.array(out)


def run_scenario(sc: LemmaScenario, states: np.ndarray, depth: int = DEFAULT_DEPTH) -> LemmaResult:
    ranks, min_sv = [], np.inf
    for x in states:
        rep = observability_rank(sc.model, sc.channels, sc.mode, x, depth=depth, speed=sc.speed)
        ranks.append(rep.rank)
        min_sv = min(min_sv, float(rep.singular_values[-1]))
    if all(r == 5 for r in ranks):
        actual = "Observable"
    elif all(r < 5 for r in ranks):
        actual = "Unobservable"
    else:
        actual = "Mixed"
    passed = None if sc.expected is None else actual == sc.expected
    return LemmaResult(sc, ranks, min_sv, actual, passed, states)


def check_lemma_suite(n_states: int = 25, seed: int = DEFAULT_STATE_SEED, depth: int = DEFAULT_DEPTH) -> list[LemmaResult]:
    states = sample_states(n_states, seed)
    return [run_scenario(sc, states, depth) for sc in lemma_corpus()]
