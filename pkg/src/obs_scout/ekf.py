"""Extended Kalman filter over the forced unicycle and a paired Monte-Carlo harness."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets
from .dynamics import TrajectoryPlan, flow_jacobian, simulate, step_rk4
from .selection import window_edges, window_of
from .sensors import SensorSpec, measure, measure_noisy, measurement_jacobian

DEFAULT_Q = np.diag([1e-6, 1e-6, 1e-8, 1e-8, 1e-8])
DEFAULT_INIT_COV = np.diag([4.0, 4.0, np.deg2rad(12.0) ** 2, 0.25, 0.25])
DEFAULT_DT_MEAS = 0.1


class DegenerateInnovationError(np.linalg.LinAlgError):
    pass


@dataclass
class EkfState:
    mean: np.ndarray
    cov: np.ndarray
    time: float = 0.0


def _clean_cov(P: np.ndarray) -> np.ndarray:
    P = 0.5 * (P + P.T)
    try:
        np.linalg.cholesky(P)
        return P
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(P)
    floor = -1e-10 * max(np.trace(P), 0.0)
    if vals[0] < floor:
        raise np.linalg.LinAlgError(f"covariance lost positive semidefiniteness (min eig {vals[0]:.3g})")
    if vals[0] < 0:
        P = (vecs * np.maximum(vals, 0.0)) @ vecs.T
        P = 0.5 * (P + P.T)
    return P


def predict(ekf: EkfState, control, dt: float, Q: np.ndarray = DEFAULT_Q) -> EkfState:
    """RK4 mean propagation; covariance through the exact closed-form flow Jacobian."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    u1, u2 = control
    F = flow_jacobian(ekf.mean, u1, u2, dt)
    mean = step_rk4(ekf.mean, control, dt)
    P = F @ ekf.cov @ F.T + Q * dt
    return EkfState(mean, _clean_cov(P), ekf.time + dt)


def innovation(spec: SensorSpec, z, mean) -> np.ndarray:
    nu = np.asarray(z, dtype=float) - measure(spec, mean)
    for i, ang in enumerate(spec.angular):
        if ang:
            nu[i] = jets.wrap_angle(nu[i])
    return nu


def update(ekf: EkfState, spec: SensorSpec, z, R: np.ndarray | None = None) -> EkfState:
    """EKF measurement update with Joseph-form covariance."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    H = measurement_jacobian(spec, ekf.mean)
    R = spec.noise_cov() if R is None else R
    P = ekf.cov
    S = H @ P @ H.T + R
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DegenerateInnovationError(f"innovation covariance for {spec.id!r} is not invertible") from None
    if np.min(np.diag(L)) ** 2 < 1e-14 * np.max(np.diag(S)):
        raise DegenerateInnovationError(f"innovation covariance for {spec.id!r} is not invertible")
    K = np.linalg.solve(S, H @ P).T
    nu = innovation(spec, z, ekf.mean)
    mean = ekf.mean + K @ nu
    A = np.eye(5) - K @ H
    P = A @ P @ A.T + K @ R @ K.T
    return EkfState(mean, _clean_cov(P), ekf.time)


@dataclass
class TrialResult:
    times: np.ndarray
    truth: np.ndarray
    estimate: np.ndarray
    cov_diag: np.ndarray
    active: list[str]
    nees: np.ndarray = field(repr=False, default=None)

    @property
    def error(self) -> np.ndarray:
        e = self.estimate - self.truth
        e[:, 2] = jets.wrap_angle(e[:, 2])
        return e

    @property
    def rmse(self) -> np.ndarray:
        """Per-state root-mean-square error over the trial."""
        return np.sqrt(np.mean(self.error**2, axis=0))


def schedule_choices(schedule) -> list[int | None]:
    if hasattr(schedule, "choices"):
        return schedule.choices
    return list(schedule)


def run_trial(plan: TrajectoryPlan, schedule, sensors: Sequence[SensorSpec], seed: int,
              Q: np.ndarray = DEFAULT_Q, init_cov: np.ndarray = DEFAULT_INIT_COV,
              dt_meas: float = DEFAULT_DT_MEAS) -> TrialResult:
    """Noise-free truth, noisy measurements from the scheduled sensor, EKF estimate traces.

    ``schedule`` is a SelectionPlan or a per-segment list of sensor indices (None = off).
    """
    choices = schedule_choices(schedule)
    traj = simulate(plan)
    times = traj.times
    edges = window_edges(times, len(choices))
    win = window_of(times, edges)
    rng = np.random.default_rng(seed)
    init_cov = np.asarray(init_cov, dtype=float)
    x0 = plan.initial + rng.multivariate_normal(np.zeros(5), init_cov)
    ekf = EkfState(x0, init_cov.copy(), times[0])

    n = len(times)
    est = np.empty((n, 5))
    cdiag = np.empty((n, 5))
    nees = np.empty(n)
    active = []
    meas_phase = times / dt_meas
    is_meas = np.abs(meas_phase - np.round(meas_phase)) < 1e-6

    for j in range(n):
        if j > 0:
            ekf = predict(ekf, traj.controls[j - 1], times[j] - times[j - 1], Q)
        c = choices[win[j]]
        active.append("" if c is None else sensors[c].id)
        if c is not None and is_meas[j]:
            spec = sensors[c]
            z = measure_noisy(spec, traj.states[j], rng)
            ekf = update(ekf, spec, z)
        est[j] = ekf.mean
        cdiag[j] = np.diag(ekf.cov)
        e = ekf.mean - traj.states[j]
        e[2] = jets.wrap_angle(e[2])
        nees[j] = e @ np.linalg.solve(ekf.cov, e)
    return TrialResult(times, traj.states, est, cdiag, active, nees)


def total_rmse(result: TrialResult, scale: np.ndarray) -> float:
    """RMSE over states after dividing each state's error by ``scale`` (unit-free)."""
    return float(np.sqrt(np.mean((result.rmse / scale) ** 2)))


def worker_count() -> int:
    n = int(os.environ.get("OBS_SCOUT_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def _paired_trial(args):
    plan, optimal, naive, sensors, seed, Q, init_cov, dt_meas = args
    scale = np.sqrt(np.diag(init_cov))
    a = run_trial(plan, optimal, sensors, seed, Q, init_cov, dt_meas)
    b = run_trial(plan, naive, sensors, seed, Q, init_cov, dt_meas)
    return a.rmse, b.rmse, total_rmse(a, scale), total_rmse(b, scale)


@dataclass
class MonteCarloSummary:
    rmse_optimal: np.ndarray  # (n_trials, 5)
    rmse_naive: np.ndarray
    total_optimal: np.ndarray  # (n_trials,)
    total_naive: np.ndarray
    seeds: list[int]

    @property
    def win_fraction(self) -> float:
        return float(np.mean(self.total_optimal <= self.total_naive))

    def to_dict(self) -> dict:
        def stats(a):
            a = np.asarray(a)
            return {
                "mean": np.mean(a, axis=0).tolist(),
                "p95": np.percentile(a, 95, axis=0).tolist(),
                "std": np.std(a, axis=0).tolist(),
            }

        return {
            "n_trials": len(self.seeds),
            "rmse_optimal": stats(self.rmse_optimal),
            "rmse_naive": stats(self.rmse_naive),
            "total_rmse_optimal": stats(self.total_optimal),
            "total_rmse_naive": stats(self.total_naive),
            "win_fraction": self.win_fraction,
        }


def monte_carlo(plan: TrajectoryPlan, optimal, naive, sensors: Sequence[SensorSpec],
                seeds: Sequence[int], Q: np.ndarray = DEFAULT_Q,
                init_cov: np.ndarray = DEFAULT_INIT_COV, dt_meas: float = DEFAULT_DT_MEAS,
                threads: int | None = None) -> MonteCarloSummary:
    """Paired trials: each seed drives one optimal-schedule and one naive-schedule run."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one trial")
    optimal, naive = schedule_choices(optimal), schedule_choices(naive)
    args = [(plan, optimal, naive, sensors, s, Q, init_cov, dt_meas) for s in seeds]
    workers = threads or worker_count()
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_paired_trial, args, chunksize=max(1, len(args) // (4 * workers))))
    else:
        rows = [_paired_trial(a) for a in args]
    ro, rn, to, tn = (np.array(col) for col in zip(*rows))
    return MonteCarloSummary(ro, rn, to, tn, seeds)
