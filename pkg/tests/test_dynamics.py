import numpy as np
import pytest
from hypothesis import given, strategies as st

from obs_scout.dynamics import (
    SegmentPlan,
    TrajectoryPlan,
    drift,
    flow_jacobian,
    propagate_arc,
    propagate_line,
    rollout_rk4,
    simulate,
    step_rk4,
)

finite = st.floats(-5, 5, allow_nan=False)
states = st.lists(finite, min_size=5, max_size=5).map(np.array)


@pytest.mark.parametrize("x, v, expected", [
    ((0, 0, 0, 0, 0), 1, (1, 0, 0, 0, 0)),
    ((0, 0, np.pi / 2, 0.5, -0.2), 2, (0.5, 1.8, 0, 0, 0)),
    ((3, 4, np.pi, 0, 0), 1, (-1, 0, 0, 0, 0)),
])
def test_drift(x, v, expected):
    np.testing.assert_allclose(drift(x, v), expected, atol=1e-12)


@pytest.mark.parametrize("x, v, t, expected", [
    ((0, 0, 0, 0, 0), 1, 1, (1, 0, 0, 0, 0)),
    ((0, 0, 0, 0.5, 0), 1, 2, (3, 0, 0, 0.5, 0)),
    ((1, 1, np.pi / 4, 0.1, 0.2), np.sqrt(2), 1, (2.1, 2.2, np.pi / 4, 0.1, 0.2)),
])
def test_propagate_line(x, v, t, expected):
    np.testing.assert_allclose(propagate_line(x, v, t), expected, atol=1e-12)


@pytest.mark.parametrize("x, omega, expected", [
    ((0, 0, 0, 0, 0), np.pi / 2, (2 / np.pi, 2 / np.pi, np.pi / 2, 0, 0)),
    ((0, 0, 0, 0, 0), 2 * np.pi, (0, 0, 2 * np.pi, 0, 0)),
    ((0, 0, 0, 1, 0), 2 * np.pi, (1, 0, 2 * np.pi, 1, 0)),
])
def test_propagate_arc(x, omega, expected):
    np.testing.assert_allclose(propagate_arc(x, 1.0, omega, 1.0), expected, atol=1e-12)


def test_arc_rejects_zero_rate():
    with pytest.raises(ValueError):
        propagate_arc(np.zeros(5), 1.0, 0.0, 1.0)


@given(states, st.floats(0, 3), st.floats(0, 3), st.floats(0, 2))
def test_line_flow_additivity(x, a, b, v):
    np.testing.assert_allclose(
        propagate_line(x, v, a + b), propagate_line(propagate_line(x, v, a), v, b), atol=1e-12)


@given(states, st.floats(0, 3), st.floats(0, 3), st.floats(0.05, 2) | st.floats(-2, -0.05))
def test_arc_flow_additivity(x, a, b, w):
    np.testing.assert_allclose(
        propagate_arc(x, 1.0, w, a + b), propagate_arc(propagate_arc(x, 1.0, w, a), 1.0, w, b),
        atol=1e-12, rtol=1e-12)


@given(states, st.floats(0, 10), st.floats(0.1, 3))
def test_unforced_line_distance(x, t, v):
    x = x.copy()
    x[3:] = 0
    y = propagate_line(x, v, t)
    assert np.hypot(*(y[:2] - x[:2])) == pytest.approx(v * t, rel=1e-12, abs=1e-12)


def test_rk4_exact_on_lines():
    x = np.array([1, -2, 0.4, 0.3, -0.1])
    np.testing.assert_allclose(rollout_rk4(x, (1.5, 0.0), 0.1, 10)[-1], propagate_line(x, 1.5, 1.0), atol=1e-12)


def test_rk4_matches_arc():
    x = np.array([0, 0, 0.3, 0.2, -0.1])
    err = np.abs(rollout_rk4(x, (1.0, 1.0), 1e-3, 1000)[-1] - propagate_arc(x, 1.0, 1.0, 1.0)).max()
    assert err <= 1e-8


def test_rk4_fourth_order_convergence():
    x = np.array([0, 0, 0.3, 0.2, -0.1])
    exact = propagate_arc(x, 1.0, 2.0, 2.0)
    errs = [np.abs(rollout_rk4(x, (1.0, 2.0), 2.0 / n, n)[-1] - exact).max() for n in (20, 40, 80)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 14 < r < 18


def test_rk4_trajectory_error_bound():
    rng = np.random.default_rng(2)
    for _ in range(5):
        v, w = rng.uniform(0.1, 2), rng.uniform(-2, 2)
        x = np.array([*rng.uniform(-5, 5, 2), rng.uniform(-np.pi, np.pi), *rng.uniform(-1, 1, 2)])
        traj = rollout_rk4(x, (v, w), 1e-3, 10_000)
        ref = propagate_arc(x, v, w, 10.0)
        assert np.abs(traj[-1, :2] - ref[:2]).max() <= 1e-6


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_rk4(np.zeros(5), (1, 0), 0.0)


def test_flow_jacobian_matches_finite_differences():
    x = np.array([1, 2, 0.7, 0.2, -0.3])
    for w in (0.0, 0.8):
        F = flow_jacobian(x, 1.3, w, 0.5)
        h = 1e-6
        fd = np.column_stack([
            (_flow(x + h * e, w) - _flow(x - h * e, w)) / (2 * h) for e in np.eye(5)])
        np.testing.assert_allclose(F, fd, atol=1e-8)
    assert flow_jacobian(x, 1.0, 0.0, 0.25)[0, 3] == 0.25


def _flow(x, w):
    return propagate_line(x, 1.3, 0.5) if w == 0 else propagate_arc(x, 1.3, w, 0.5)


def test_simulate_samples():
    plan = TrajectoryPlan(np.zeros(5), 1.0, [SegmentPlan.line(1.0)], dt=0.5)
    np.testing.assert_allclose(simulate(plan).times, [0, 0.5, 1.0])


def test_simulate_boundary_off_grid():
    plan = TrajectoryPlan(np.zeros(5), 1.0, [SegmentPlan.line(0.25), SegmentPlan.arc(0.5, 1.0)], dt=0.2)
    t = simulate(plan).times
    assert 0.25 in t and t[-1] == 0.75


def test_simulate_line_then_arc():
    x0 = np.array([0.5, -1, 0.2, 0.3, 0.1])
    plan = TrajectoryPlan(x0, 1.0, [SegmentPlan.line(1.0), SegmentPlan.arc(1.0, 1.0)], dt=1e-2)
    traj = simulate(plan)
    theta_expected = np.where(traj.times <= 1.0, 0.2, 0.2 + traj.times - 1.0)
    np.testing.assert_allclose(traj.states[:, 2], theta_expected, atol=1e-12)
    end = propagate_arc(propagate_line(x0, 1.0, 1.0), 1.0, 1.0, 1.0)
    np.testing.assert_allclose(traj.states[-1], end, atol=1e-12)
    assert np.all(traj.states[:, 3] == x0[3]) and np.all(traj.states[:, 4] == x0[4])
    assert traj.controls[0, 1] == 0.0 and traj.controls[-2, 1] == 1.0


def test_theta_is_not_wrapped():
    plan = TrajectoryPlan(np.zeros(5), 1.0, [SegmentPlan.arc(10.0, 1.0)], dt=0.1)
    assert simulate(plan).states[-1, 2] == pytest.approx(10.0)


@pytest.mark.parametrize("kwargs", [
    dict(segments=[]),
    dict(segments=[SegmentPlan.line(1.0)], dt=2.0),
    dict(segments=[SegmentPlan.line(1.0)], dt=0.0),
])
def test_plan_validation(kwargs):
    with pytest.raises(ValueError):
        TrajectoryPlan(np.zeros(5), 1.0, **kwargs)


def test_segment_validation():
    with pytest.raises(ValueError):
        SegmentPlan("arc", 1.0, 0.0)
    with pytest.raises(ValueError):
        SegmentPlan("line", 1.0, 0.1)
    with pytest.raises(ValueError):
        SegmentPlan.line(0.0)
