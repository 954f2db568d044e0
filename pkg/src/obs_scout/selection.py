"""Per-segment sensor activation maximizing the smallest Gramian eigenvalue."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import TrajectoryPlan
from .gramian import DEFAULT_EPSILON, Gramian, gramian_integrand, integrate_pieces, output_differences
from .sensors import SensorSpec

MAX_EXHAUSTIVE = 10**6
TIE_TOL = 1e-12


class SearchSpaceError(ValueError):
    pass


@dataclass
class SegmentGramians:
    """``W[i, k]`` is the 5x5 Gramian of sensor i integrated over window k only."""

    W: np.ndarray  # (p, K, 5, 5)
    epsilon: float
    window_edges: np.ndarray  # K + 1 times
    sensor_ids: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def K(self) -> int:
        return self.W.shape[1]


@dataclass
class SelectionPlan:
    """Binary (or relaxed) activation ``s[i, k]``; at most one unit of activation per segment."""

    s: np.ndarray  # (p, K)
    objective: float
    trace: list[float] = field(default_factory=list)
    relaxed: np.ndarray | None = None
    relaxed_objective: float | None = None

    @property
    def choices(self) -> list[int | None]:
        """Active sensor index per segment, None where nothing is active."""
        out = []
        for k in range(self.s.shape[1]):
            on = np.flatnonzero(self.s[:, k] > 0.5)
            out.append(int(on[0]) if len(on) else None)
        return out


def lambda_min(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def window_edges(times: np.ndarray, K: int) -> np.ndarray:
    """K equal windows over the horizon, edges snapped to the nearest sample time."""
    if K < 1:
        raise ValueError("K must be >= 1")
    target = times[0] + (times[-1] - times[0]) * np.arange(K + 1) / K
    idx = np.abs(times[None, :] - target[:, None]).argmin(axis=1)
    return times[idx]


def window_of(times: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Window index of each sample time (the final sample joins the last window)."""
    K = len(edges) - 1
    return np.clip(np.searchsorted(edges, times, side="right") - 1, 0, K - 1)


def segment_gramians(plan: TrajectoryPlan, sensors: Sequence[SensorSpec], K: int,
                     epsilon: float = DEFAULT_EPSILON) -> SegmentGramians:
    """Per-sensor, per-window Gramians; perturbations stay anchored at the plan's initial state."""
    od = output_differences(plan, sensors, epsilon)
    edges = window_edges(od.times, K)
    breaks = np.union1d(od.breakpoints, edges)
    W = np.zeros((len(sensors), K, 5, 5))
    for i in range(len(sensors)):
        integrand = gramian_integrand(od.dy, epsilon, od.channel_sensor == i)
        for k in range(K):
            M = integrate_pieces(od.times, integrand, breaks, edges[k], edges[k + 1])
            W[i, k] = 0.5 * (M + M.T)
    return SegmentGramians(W, epsilon, edges, [s.id for s in sensors])


def assemble(W: SegmentGramians | np.ndarray, s: np.ndarray) -> np.ndarray:
    Wa = W.W if isinstance(W, SegmentGramians) else np.asarray(W)
    s = np.asarray(s, dtype=float)
    if s.shape != Wa.shape[:2]:
        raise ValueError(f"activation shape {s.shape} does not match (p, K) = {Wa.shape[:2]}")
    return np.einsum("ik,ikab->ab", s, Wa)


def _plan_from_choices(choices: Sequence[int], p: int) -> np.ndarray:
    """choices[k] in 0..p-1 activates that sensor; p means no sensor."""
    s = np.zeros((p, len(choices)))
    for k, c in enumerate(choices):
        if c < p:
            s[c, k] = 1.0
    return s


def _better(new: float, best: float) -> bool:
    if best == -np.inf:
        return True
    return new > best + TIE_TOL * max(1.0, abs(best))


def optimize_exhaustive(W: SegmentGramians) -> SelectionPlan:
    """Enumerate every per-segment choice; ties go to the lexicographically smallest choice string."""
    p, K = W.p, W.K
    if (p + 1) ** K > MAX_EXHAUSTIVE:
        raise SearchSpaceError(
            f"exhaustive search over (p+1)^K = {p + 1}^{K} plans exceeds {MAX_EXHAUSTIVE}; "
            "use the greedy or relaxed solver"
        )
    best, best_choice = -np.inf, None
    # partial sums over the first K-1 segments are shared across the last choice
    for head in itertools.product(range(p + 1), repeat=K - 1):
        base = np.zeros((5, 5))
        for k, c in enumerate(head):
            if c < p:
                base += W.W[c, k]
        for c in range(p + 1):
            M = base + W.W[c, K - 1] if c < p else base
            val = lambda_min(M)
            if _better(val, best):
                best, best_choice = val, head + (c,)
    return SelectionPlan(_plan_from_choices(best_choice, p), best)


def _spectrum_better(new: np.ndarray, best: np.ndarray | None) -> bool:
    """Leximin comparison of ascending spectra: first lambda_min, then the next eigenvalue, ..."""
    if best is None:
        return True
    for a, b in zip(new, best):
        tol = TIE_TOL * max(1.0, abs(b))
        if a > b + tol:
            return True
        if a < b - tol:
            return False
    return False


def optimize_greedy(W: SegmentGramians) -> SelectionPlan:
    """Forward pass picking the best option per segment, then one improvement sweep over segment pairs.

    The forward pass ranks options by lambda_min and settles ties on the rest of
    the spectrum, which matters while every partial sum is still rank deficient.
    """
    p, K = W.p, W.K
    choice = [p] * K
    running = np.zeros((5, 5))
    trace = []
    for k in range(K):
        best, best_c = None, p
        for c in range(p + 1):
            M = running + W.W[c, k] if c < p else running
            spec = np.linalg.eigvalsh(0.5 * (M + M.T))
            if _spectrum_better(spec, best):
                best, best_c = spec, c
        choice[k] = best_c
        if best_c < p:
            running = running + W.W[best_c, k]
    spectrum = np.linalg.eigvalsh(0.5 * (running + running.T))
    trace.append(float(spectrum[0]))
    # one pass over segment pairs, trying every joint reassignment of the pair;
    # only leximin improvements are accepted, so lambda_min never decreases
    pairs = [(k, k) for k in range(K)] if K == 1 else list(itertools.combinations(range(K), 2))
    for k, l in pairs:
        without = running
        for j in {k, l}:
            if choice[j] < p:
                without = without - W.W[choice[j], j]
        for ck, cl in itertools.product(range(p + 1), repeat=2):
            if k == l and ck != cl:
                continue
            if (ck, cl) == (choice[k], choice[l]):
                continue
            M = without
            for j, c in {k: ck, l: cl}.items():
                if c < p:
                    M = M + W.W[c, j]
            spec = np.linalg.eigvalsh(0.5 * (M + M.T))
            if _spectrum_better(spec, spectrum):
                spectrum, running = spec, M
                choice[k], choice[l] = ck, cl
        trace.append(float(spectrum[0]))
    current = float(spectrum[0])
    return SelectionPlan(_plan_from_choices(choice, p), current, trace)


def project_capped_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {s >= 0, sum(s) <= 1}."""
    w = np.maximum(v, 0.0)
    if w.sum() <= 1.0:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def min_eigpair(M: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    return float(vals[0]), vecs[:, 0]


def supergradient(W: SegmentGramians, s: np.ndarray) -> tuple[float, np.ndarray]:
    """lambda_min(W(s)) and the supergradient v^T W[i, k] v from the first min eigenvector."""
    lam, vec = min_eigpair(assemble(W, s))
    return lam, np.einsum("a,ikab,b->ik", vec, W.W, vec)


def round_relaxed(s: np.ndarray) -> np.ndarray:
    p, K = s.shape
    choices = []
    for k in range(K):
        i = int(np.argmax(s[:, k]))
        choices.append(i if s[i, k] > 0.5 else p)
    return _plan_from_choices(choices, p)


def optimize_relaxed(W: SegmentGramians, iters: int = 500, step0: float = 0.5) -> SelectionPlan:
    """Projected supergradient ascent on lambda_min(W(s)) over per-segment capped simplices.

    Steps are ``step0 / sqrt(t + 1)`` along the normalized supergradient, starting
    from an even split across sensors.  The best iterate is kept; the returned
    binary plan is the better of its rounding and the greedy plan.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    p, K = W.p, W.K
    s = np.full((p, K), 1.0 / p)
    best_val, best_s = -np.inf, s.copy()
    trace = []
    for t in range(iters):
        lam, g = supergradient(W, s)
        if lam > best_val:
            best_val, best_s = lam, s.copy()
        trace.append(best_val)
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        s = s + step0 / np.sqrt(t + 1) * g / norm
        s = np.column_stack([project_capped_simplex(s[:, k]) for k in range(K)])
    lam = lambda_min(assemble(W, s))
    if lam > best_val:
        best_val, best_s = lam, s.copy()
    trace.append(best_val)

    rounded = round_relaxed(best_s)
    rounded_val = lambda_min(assemble(W, rounded))
    greedy = optimize_greedy(W)
    if _better(rounded_val, greedy.objective):
        binary, val = rounded, rounded_val
    else:
        binary, val = greedy.s, greedy.objective
    return SelectionPlan(binary, val, trace, relaxed=best_s, relaxed_objective=best_val)


def naive_plan(p: int, K: int, sensor: int = 0) -> np.ndarray:
    """The same sensor in every segment."""
    return _plan_from_choices([sensor] * K, p)
