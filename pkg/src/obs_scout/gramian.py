"""Empirical observability Gramians and closed-form line/circle Gramians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from . import jets
from .dynamics import TrajectoryPlan, simulate
from .sensors import SensorSpec, SingularMeasurementError, measure

DEFAULT_EPSILON = 0.01


@dataclass
class Gramian:
    matrix: np.ndarray
    epsilon: float
    horizon: tuple[float, float]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        self.matrix = 0.5 * (m + m.T)

    def __add__(self, other: "Gramian") -> "Gramian":
        return dubins_gramian(self, other)

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    lambda_min: float
    rank: int

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "eigenvectors": [[float(v) for v in col] for col in self.eigenvectors.T],
            "lambda_min": self.lambda_min,
            "rank": self.rank,
        }


# -- empirical --------------------------------------------------------------

@dataclass
class OutputDifferences:
    """Perturbation output differences on the nominal time grid.

    ``dy[t, ch, i]`` is y^{+i} - y^{-i} for scalar channel ``ch`` at sample ``t``;
    ``channel_sensor[ch]`` indexes the owning sensor.
    """

    times: np.ndarray
    dy: np.ndarray
    channel_sensor: np.ndarray
    breakpoints: np.ndarray
    epsilon: float


def _outputs(plan: TrajectoryPlan, sensors: Sequence[SensorSpec]) -> tuple[np.ndarray, np.ndarray]:
    traj = simulate(plan)
    cols = []
    for spec in sensors:
        try:
            ys = np.array([measure(spec, x) for x in traj.states])
        except SingularMeasurementError:
            for t, x in zip(traj.times, traj.states):
                try:
                    measure(spec, x)
                except SingularMeasurementError as err:
                    raise SingularMeasurementError(f"{err} at t = {t:.6g} s") from None
            raise
        cols.append(ys)
    return traj.times, np.concatenate(cols, axis=1)


def output_differences(plan: TrajectoryPlan, sensors: Sequence[SensorSpec],
                       epsilon: float = DEFAULT_EPSILON) -> OutputDifferences:
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    angular = np.concatenate([s.angular for s in sensors]).astype(bool)
    owner = np.concatenate([[k] * s.n_channels for k, s in enumerate(sensors)])
    dy = None
    times = None
    for i in range(5):
        e = np.zeros(5)
        e[i] = epsilon
        times, yp = _outputs(plan.with_initial(plan.initial + e), sensors)
        _, ym = _outputs(plan.with_initial(plan.initial - e), sensors)
        d = yp - ym
        d[:, angular] = jets.wrap_angle(d[:, angular])
        if dy is None:
            dy = np.empty((len(times), d.shape[1], 5))
        dy[:, :, i] = d
    return OutputDifferences(times, dy, owner, plan.boundaries(), epsilon)


def integrate_pieces(times: np.ndarray, values: np.ndarray, breakpoints: Sequence[float],
                     t_start: float | None = None, t_end: float | None = None) -> np.ndarray:
    """Integral over [t_start, t_end] of sampled values (axis 0), by composite Simpson on
    each piece between consecutive breakpoints (integrands are smooth within pieces)."""
    t_start = times[0] if t_start is None else t_start
    t_end = times[-1] if t_end is None else t_end
    cuts = sorted({float(b) for b in breakpoints if t_start < b < t_end} | {float(t_start), float(t_end)})
    total = np.zeros(values.shape[1:])
    for a, b in zip(cuts[:-1], cuts[1:]):
        lo = int(np.searchsorted(times, a - 1e-12))
        hi = int(np.searchsorted(times, b + 1e-12))
        if hi - lo < 2:
            continue
        total += simpson(values[lo:hi], x=times[lo:hi], axis=0)
    return total


def gramian_integrand(dy: np.ndarray, epsilon: float, channel_mask=None) -> np.ndarray:
    """Per-sample (1/4 eps^2) * sum_ch Y_ch^T Y_ch, shape (n_samples, 5, 5)."""
    d = dy if channel_mask is None else dy[:, channel_mask, :]
    return np.einsum("tci,tcj->tij", d, d) / (4.0 * epsilon**2)


def empirical_gramian(plan: TrajectoryPlan, sensors: Sequence[SensorSpec],
                      epsilon: float = DEFAULT_EPSILON) -> Gramian:
    """Gramian from +/- epsilon perturbation rollouts of every state, noise-free outputs."""
    od = output_differences(plan, sensors, epsilon)
    integrand = gramian_integrand(od.dy, epsilon)
    W = integrate_pieces(od.times, integrand, od.breakpoints)
    return Gramian(W, epsilon, (float(od.times[0]), float(od.times[-1])))


# -- closed forms -----------------------------------------------------------

def _common_blocks(T: float) -> np.ndarray:
    W = np.zeros((5, 5))
    W[0, 0] = W[1, 1] = T
    W[0, 3] = W[3, 0] = W[1, 4] = W[4, 1] = T**2 / 2
    W[3, 3] = W[4, 4] = T**3 / 3
    return W


def analytic_line_gramian(t1: float, v: float, theta0: float,
                          epsilon: float = DEFAULT_EPSILON) -> Gramian:
    if t1 < 0:
        raise ValueError("t1 must be >= 0")
    W = _common_blocks(t1)
    s = np.sin(epsilon) / epsilon
    col = np.array([
        -t1**2 * v / 2 * s * np.sin(theta0),
        t1**2 * v / 2 * s * np.cos(theta0),
        t1**3 * v**2 / 3 * s**2 * (np.cos(theta0) ** 2 + np.sin(theta0) ** 2),
        -t1**3 * v / 3 * s * np.sin(theta0),
        t1**3 * v / 3 * s * np.cos(theta0),
    ])
    W[:, 2] = col
    W[2, :] = col
    return Gramian(W, epsilon, (0.0, float(t1)))


def analytic_circle_gramian(t2: float, v: float, theta0: float, omega0: float,
                            epsilon: float = DEFAULT_EPSILON) -> Gramian:
    """Exact time integral of the circular-arc output differences.

    With phi = omega0*t2 + theta0 the heading-perturbation responses are
    a(t) = k (cos(w t + th0) - cos th0) and b(t) = k (sin(w t + th0) - sin th0),
    k = v sin(eps) / (eps w).
    """
    if omega0 == 0:
        raise ValueError("omega0 must be nonzero; use analytic_line_gramian")
    if t2 < 0:
        raise ValueError("t2 must be >= 0")
    T, w, th = t2, omega0, theta0
    k = v * np.sin(epsilon) / (epsilon * w)
    phi = w * T + th
    half = np.sin(w * T / 2)
    dsin = 2 * np.cos(th + w * T / 2) * half  # sin(phi) - sin(th)
    dcos = -2 * np.sin(th + w * T / 2) * half  # cos(phi) - cos(th)
    int_a = k * (dsin / w - T * np.cos(th))
    int_b = k * (-dcos / w - T * np.sin(th))
    int_aa_bb = k**2 * (2 * T - 2 * np.sin(w * T) / w)
    int_ta = k * (T * np.sin(phi) / w + dcos / w**2 - np.cos(th) * T**2 / 2)
    int_tb = k * (-T * np.cos(phi) / w + dsin / w**2 - np.sin(th) * T**2 / 2)
    W = _common_blocks(T)
    col = np.array([int_a, int_b, int_aa_bb, int_ta, int_tb])
    W[:, 2] = col
    W[2, :] = col
    return Gramian(W, epsilon, (0.0, float(T)))


def dubins_gramian(line: Gramian, circle: Gramian) -> Gramian:
    if line.epsilon != circle.epsilon:
        raise ValueError(f"epsilon mismatch: {line.epsilon} vs {circle.epsilon}")
    t0 = min(line.horizon[0], circle.horizon[0])
    span = (line.horizon[1] - line.horizon[0]) + (circle.horizon[1] - circle.horizon[0])
    return Gramian(line.matrix + circle.matrix, line.epsilon, (t0, t0 + span))


# -- eigen-analysis ---------------------------------------------------------

def eigen_analysis(W: Gramian | np.ndarray, tol_rel: float = 1e-8) -> EigenReport:
    """Descending eigenpairs; each eigenvector signed so its largest-magnitude entry is positive."""
    M = W.matrix if isinstance(W, Gramian) else np.asarray(W, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    for j in range(vecs.shape[1]):
        big = np.argmax(np.abs(vecs[:, j]))
        if vecs[big, j] < 0:
            vecs[:, j] = -vecs[:, j]
    lmax = max(abs(vals[0]), abs(vals[-1]))
    rank = 0 if lmax == 0 else int(np.sum(vals > tol_rel * lmax))
    return EigenReport(vals, vecs, float(vals[-1]), rank)
