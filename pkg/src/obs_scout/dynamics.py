"""Forced unicycle / Dubins vehicle: vector fields and trajectory propagation.

State vector layout is ``(p1, p2, theta, c1, c2)``: planar position, heading
and a constant unknown forcing velocity.  Heading is never wrapped here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import jets

P1, P2, THETA, C1, C2 = range(5)
STATE_NAMES = ("p1", "p2", "theta", "c1", "c2")


class SegmentKind(str, Enum):
    LINE = "line"
    ARC = "arc"


@dataclass(frozen=True)
class SegmentPlan:
    kind: SegmentKind
    duration: float
    turn_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SegmentKind(self.kind))
        if not self.duration > 0:
            raise ValueError(f"segment duration must be > 0, got {self.duration}")
        if self.kind is SegmentKind.LINE and self.turn_rate != 0:
            raise ValueError("line segment must have turn_rate 0")
        if self.kind is SegmentKind.ARC and self.turn_rate == 0:
            raise ValueError("arc segment needs a nonzero turn_rate")

    @classmethod
    def line(cls, duration: float) -> "SegmentPlan":
        return cls(SegmentKind.LINE, duration)

    @classmethod
    def arc(cls, duration: float, turn_rate: float) -> "SegmentPlan":
        return cls(SegmentKind.ARC, duration, turn_rate)


@dataclass(frozen=True)
class TrajectoryPlan:
    initial: np.ndarray
    speed: float
    segments: tuple[SegmentPlan, ...]
    dt: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "initial", np.asarray(self.initial, dtype=float).copy())
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.initial.shape != (5,):
            raise ValueError("initial state must have 5 components")
        if not self.segments:
            raise ValueError("trajectory plan needs at least one segment")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.dt > min(s.duration for s in self.segments) * (1 + 1e-12):
            raise ValueError("dt must not exceed the shortest segment duration")

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def with_initial(self, initial) -> "TrajectoryPlan":
        return replace(self, initial=np.asarray(initial, dtype=float))


@dataclass
class Trajectory:
    """Sampled trajectory.  ``controls[j]`` is the (u1, u2) held on [t_j, t_{j+1})."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    segment_index: np.ndarray
    boundary_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __len__(self) -> int:
        return len(self.times)


def drift(state, speed: float) -> np.ndarray:
    """Constant-speed drift (v cos(theta) + c1, v sin(theta) + c2, 0, 0, 0)."""
    x = np.asarray(state, dtype=float)
    return np.array(
        [speed * np.cos(x[THETA]) + x[C1], speed * np.sin(x[THETA]) + x[C2], 0.0, 0.0, 0.0]
    )


def unicycle_rhs(state, control) -> np.ndarray:
    x = np.asarray(state, dtype=float)
    u1, u2 = control
    return np.array(
        [x[C1] + u1 * np.cos(x[THETA]), x[C2] + u1 * np.sin(x[THETA]), u2, 0.0, 0.0]
    )


def vector_fields(x, speed: float = 0.0):
    """Drift f0 + speed*f1 and the input fields f1, f2, evaluated on floats or jets."""
    ct, st = jets.cos(x[THETA]), jets.sin(x[THETA])
    f1 = [ct, st, 0.0, 0.0, 0.0]
    f2 = [0.0, 0.0, 1.0, 0.0, 0.0]
    f0 = [x[C1] + ct * speed, x[C2] + st * speed, 0.0, 0.0, 0.0]
    return f0, f1, f2


def propagate_line(state, speed: float, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    x = np.array(state, dtype=float)
    x[P1] += (speed * np.cos(x[THETA]) + x[C1]) * t
    x[P2] += (speed * np.sin(x[THETA]) + x[C2]) * t
    return x


def propagate_arc(state, speed: float, omega: float, t: float) -> np.ndarray:
    if omega == 0:
        raise ValueError("propagate_arc needs omega != 0; use propagate_line")
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    x = np.array(state, dtype=float)
    th0 = x[THETA]
    x[P1] += x[C1] * t + speed / omega * (np.sin(omega * t + th0) - np.sin(th0))
    x[P2] += x[C2] * t - speed / omega * (np.cos(omega * t + th0) - np.cos(th0))
    x[THETA] = th0 + omega * t
    return x


def propagate(state, speed: float, omega: float, t: float) -> np.ndarray:
    if omega == 0:
        return propagate_line(state, speed, t)
    return propagate_arc(state, speed, omega, t)


def _propagate_many(state, speed: float, omega: float, ts: np.ndarray) -> np.ndarray:
    x = np.asarray(state, dtype=float)
    out = np.tile(x, (len(ts), 1))
    th0 = x[THETA]
    if omega == 0:
        out[:, P1] += (speed * np.cos(th0) + x[C1]) * ts
        out[:, P2] += (speed * np.sin(th0) + x[C2]) * ts
    else:
        out[:, P1] += x[C1] * ts + speed / omega * (np.sin(omega * ts + th0) - np.sin(th0))
        out[:, P2] += x[C2] * ts - speed / omega * (np.cos(omega * ts + th0) - np.cos(th0))
        out[:, THETA] = th0 + omega * ts
    return out


def flow_jacobian(state, speed: float, omega: float, t: float) -> np.ndarray:
    """Exact Jacobian of the closed-form line/arc flow over time t."""
    th0 = float(np.asarray(state, dtype=float)[THETA])
    F = np.eye(5)
    F[P1, C1] = t
    F[P2, C2] = t
    if omega == 0:
        F[P1, THETA] = -speed * np.sin(th0) * t
        F[P2, THETA] = speed * np.cos(th0) * t
    else:
        F[P1, THETA] = speed / omega * (np.cos(omega * t + th0) - np.cos(th0))
        F[P2, THETA] = speed / omega * (np.sin(omega * t + th0) - np.sin(th0))
    return F


def step_rk4(state, control, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of the unicycle dynamics."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    x = np.asarray(state, dtype=float)
    k1 = unicycle_rhs(x, control)
    k2 = unicycle_rhs(x + 0.5 * dt * k1, control)
    k3 = unicycle_rhs(x + 0.5 * dt * k2, control)
    k4 = unicycle_rhs(x + dt * k3, control)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rollout_rk4(state, control, dt: float, n_steps: int) -> np.ndarray:
    out = np.empty((n_steps + 1, 5))
    out[0] = state
    for k in range(n_steps):
        out[k + 1] = step_rk4(out[k], control, dt)
    return out


def sample_times(plan: TrajectoryPlan) -> tuple[np.ndarray, np.ndarray]:
    """Multiples of dt plus every segment boundary.

    Returns the sorted times and the sample index of each boundary.
    """
    bounds = plan.boundaries()
    total = bounds[-1]
    n = int(np.floor(total / plan.dt + 1e-9))
    grid = np.arange(n + 1) * plan.dt
    merge_tol = 1e-9 * plan.dt
    times = np.concatenate([grid, bounds])
    times.sort()
    keep = np.concatenate([[True], np.diff(times) > merge_tol])
    times = times[keep]
    times = times[times <= total + merge_tol]
    bidx = np.searchsorted(times, bounds - merge_tol)
    # snap boundary samples exactly onto the boundary values
    times[bidx] = bounds
    return times, bidx


def simulate(plan: TrajectoryPlan) -> Trajectory:
    """Closed-form propagation of each segment, sampled on the plan grid."""
    if not plan.segments:
        raise ValueError("empty segment list")
    times, bidx = sample_times(plan)
    states = np.empty((len(times), 5))
    controls = np.empty((len(times), 2))
    seg_idx = np.empty(len(times), dtype=int)
    bounds = plan.boundaries()
    start = plan.initial.copy()
    for k, seg in enumerate(plan.segments):
        lo, hi = bidx[k], bidx[k + 1]
        sl = slice(lo, hi + 1)
        states[sl] = _propagate_many(start, plan.speed, seg.turn_rate, times[sl] - bounds[k])
        controls[lo : hi + 1] = (plan.speed, seg.turn_rate)
        seg_idx[sl] = k
        start = states[hi].copy()
    # the final sample keeps the last segment's control
    return Trajectory(times, states, controls, seg_idx, bidx)
