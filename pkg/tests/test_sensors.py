import numpy as np
import pytest
from hypothesis import given, strategies as st

from obs_scout import jets
from obs_scout.sensors import (
    SensorSpec,
    SingularMeasurementError,
    bearing_sensor,
    gps,
    jet_measure,
    magnetometer,
    measure,
    measure_noisy,
    measurement_jacobian,
    range_sensor,
)

from conftest import random_states

ALL = [gps(), magnetometer(), range_sensor((3, -7)), bearing_sensor((-6, 4))]


def test_gps():
    np.testing.assert_array_equal(measure(gps(), [3, 4, 1, 0, 0]), [3, 4])


def test_range_345():
    assert measure(range_sensor((0, 0)), [3, 4, 0, 0, 0])[0] == pytest.approx(5.0)


def test_bearing_wrap():
    b = bearing_sensor((0, 0))
    assert measure(b, [1, 1, 0, 0, 0])[0] == pytest.approx(np.pi / 4)
    assert measure(b, [1, 1, np.pi, 0, 0])[0] == pytest.approx(-3 * np.pi / 4)


def test_magnetometer_wraps():
    assert measure(magnetometer(), [0, 0, 3 * np.pi / 2, 0, 0])[0] == pytest.approx(-np.pi / 2)


@pytest.mark.parametrize("spec", [range_sensor((1, 2)), bearing_sensor((1, 2))])
def test_beacon_coincidence(spec):
    with pytest.raises(SingularMeasurementError):
        measure(spec, [1, 2, 0, 0, 0])
    with pytest.raises(SingularMeasurementError):
        jet_measure(spec, jets.seed([1, 2, 0, 0, 0], 2))


def test_spec_validation():
    with pytest.raises(ValueError):
        SensorSpec("x", "gps", -1.0)
    with pytest.raises(ValueError):
        SensorSpec("x", "range", 1.0)
    with pytest.raises(ValueError):
        SensorSpec("x", "gps", 1.0, (0, 0))


def test_channel_counts():
    assert [s.n_channels for s in ALL] == [2, 1, 1, 1]


@pytest.mark.parametrize("spec", ALL)
def test_zero_sigma_override(spec, rng):
    x = [1, 2, 0.3, 0, 0]
    np.testing.assert_array_equal(measure_noisy(spec, x, rng, sigma=0.0), measure(spec, x))


@pytest.mark.parametrize("spec, sigma", [(gps(), 2.0), (magnetometer(), 12 * np.pi / 180)])
def test_noise_std(spec, sigma):
    r = np.random.default_rng(99)
    x = np.zeros(5)
    z = np.array([measure_noisy(spec, x, r) for _ in range(100_000)])
    assert np.std(z[:, 0]) == pytest.approx(sigma, rel=0.02)


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-50, 50))
def test_angular_outputs_in_range(p1, p2, th):
    for spec in (magnetometer(), bearing_sensor((0.5, 0.5))):
        if spec.beacon and (p1, p2) == spec.beacon:
            continue
        z = measure(spec, [p1, p2, th, 0, 0])[0]
        assert -np.pi < z <= np.pi


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_range_gradient_unit_norm(p1, p2):
    spec = range_sensor((0.5, -0.5))
    if np.hypot(p1 - 0.5, p2 + 0.5) < 1e-3:
        return
    assert measure(spec, [p1, p2, 0, 0, 0])[0] >= 0
    g = measurement_jacobian(spec, [p1, p2, 0, 0, 0])[0]
    assert np.hypot(g[0], g[1]) == pytest.approx(1.0, rel=1e-12)


def test_jet_values_and_gradients():
    x = np.array([3, 4, 0.2, 0.1, 0.1])
    for spec in ALL:
        vals = [j.value() for j in jet_measure(spec, jets.seed(x, 3))]
        np.testing.assert_allclose(vals, measure(spec, x))
    np.testing.assert_allclose(measurement_jacobian(range_sensor((0, 0)), x)[0], [0.6, 0.8, 0, 0, 0])
    for x in random_states(5, seed=4):
        assert measurement_jacobian(bearing_sensor((0, 0)), x)[0, 2] == -1.0


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.id)
def test_jacobian_matches_finite_differences(spec):
    h = 1e-6
    for x in random_states(100, seed=8):
        H = measurement_jacobian(spec, x)
        fd = np.column_stack([
            jets.wrap_angle(measure(spec, x + h * e) - measure(spec, x - h * e)) / (2 * h) for e in np.eye(5)])
        np.testing.assert_allclose(H, fd, rtol=1e-5, atol=1e-7)
