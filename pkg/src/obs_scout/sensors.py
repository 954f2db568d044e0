"""Measurement models: GPS, magnetometer, range and bearing to a beacon."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import jets
from .dynamics import P1, P2, THETA


class SingularMeasurementError(ValueError):
    """Vehicle position coincides with a beacon, so range/bearing lose their gradient."""


class SensorKind(str, Enum):
    GPS = "gps"
    MAGNETOMETER = "magnetometer"
    RANGE = "range"
    BEARING = "bearing"


# per-channel flag: True where the channel is an angle wrapped to (-pi, pi]
ANGULAR_CHANNELS = {
    SensorKind.GPS: (False, False),
    SensorKind.MAGNETOMETER: (True,),
    SensorKind.RANGE: (False,),
    SensorKind.BEARING: (True,),
}

# Noise levels of the reference sensor suite, in SI units (m or rad).
DEFAULT_SIGMA = {
    SensorKind.GPS: 2.0,
    SensorKind.MAGNETOMETER: np.deg2rad(12.0),
    SensorKind.RANGE: 1.0,
    SensorKind.BEARING: np.deg2rad(5.0),
}


@dataclass(frozen=True)
class SensorSpec:
    id: str
    kind: SensorKind
    sigma: float
    beacon: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SensorKind(self.kind))
        if not self.sigma > 0:
            raise ValueError(f"sensor {self.id!r}: sigma must be > 0")
        uses_beacon = self.kind in (SensorKind.RANGE, SensorKind.BEARING)
        if uses_beacon and self.beacon is None:
            raise ValueError(f"sensor {self.id!r}: {self.kind.value} needs a beacon")
        if not uses_beacon and self.beacon is not None:
            raise ValueError(f"sensor {self.id!r}: {self.kind.value} takes no beacon")
        if self.beacon is not None:
            object.__setattr__(self, "beacon", (float(self.beacon[0]), float(self.beacon[1])))

    @property
    def n_channels(self) -> int:
        return len(ANGULAR_CHANNELS[self.kind])

    @property
    def angular(self) -> tuple[bool, ...]:
        return ANGULAR_CHANNELS[self.kind]

    def noise_cov(self) -> np.ndarray:
        return np.eye(self.n_channels) * self.sigma**2


def gps(sigma: float = DEFAULT_SIGMA[SensorKind.GPS], id: str = "gps") -> SensorSpec:
    return SensorSpec(id, SensorKind.GPS, sigma)


def magnetometer(sigma: float = DEFAULT_SIGMA[SensorKind.MAGNETOMETER], id: str = "mag") -> SensorSpec:
    return SensorSpec(id, SensorKind.MAGNETOMETER, sigma)


def range_sensor(beacon, sigma: float = DEFAULT_SIGMA[SensorKind.RANGE], id: str = "range") -> SensorSpec:
    return SensorSpec(id, SensorKind.RANGE, sigma, tuple(beacon))


def bearing_sensor(beacon, sigma: float = DEFAULT_SIGMA[SensorKind.BEARING], id: str = "bearing") -> SensorSpec:
    return SensorSpec(id, SensorKind.BEARING, sigma, tuple(beacon))


def _value(x) -> float:
    return x.value() if isinstance(x, jets.Jet) else float(x)


def channels(spec: SensorSpec, x) -> list:
    """Measurement formulas, evaluated on a float state or a list of jets."""
    if spec.kind is SensorKind.GPS:
        return [x[P1], x[P2]]
    if spec.kind is SensorKind.MAGNETOMETER:
        return [jets.wrap_angle(x[THETA])]
    b1, b2 = spec.beacon
    dx, dy = x[P1] - b1, x[P2] - b2
    if _value(dx) == 0.0 and _value(dy) == 0.0:
        raise SingularMeasurementError(
            f"sensor {spec.id!r}: position coincides with beacon {spec.beacon}"
        )
    if spec.kind is SensorKind.RANGE:
        return [jets.sqrt(dx * dx + dy * dy)]
    return [jets.wrap_angle(jets.atan2(dy, dx) - x[THETA])]


def measure(spec: SensorSpec, state) -> np.ndarray:
    x = np.asarray(state, dtype=float)
    return np.array([float(c) for c in channels(spec, x)])


def measure_noisy(spec: SensorSpec, state, rng: np.random.Generator, sigma: float | None = None) -> np.ndarray:
    """Noise-free measurement plus i.i.d. Gaussian noise; angles are re-wrapped."""
    z = measure(spec, state)
    s = spec.sigma if sigma is None else sigma
    z = z + rng.normal(0.0, 1.0, size=z.shape) * s
    for i, ang in enumerate(spec.angular):
        if ang:
            z[i] = jets.wrap_angle(z[i])
    return z


def jet_measure(spec: SensorSpec, x_jets) -> list[jets.Jet]:
    if x_jets[0].order < 1:
        raise ValueError("jet_measure needs jets of order >= 1")
    return channels(spec, x_jets)


def measurement_jacobian(spec: SensorSpec, state) -> np.ndarray:
    """Rows of first-order coefficients of each channel."""
    xj = jets.seed(state, order=1)
    return np.array([c.gradient() for c in jet_measure(spec, xj)])


def channel_labels(spec: SensorSpec) -> list[str]:
    if spec.kind is SensorKind.GPS:
        return [f"{spec.id}.p1", f"{spec.id}.p2"]
    return [spec.id]
