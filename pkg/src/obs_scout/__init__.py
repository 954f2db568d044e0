"""Observability analysis and sensor scheduling for a forced unicycle / Dubins vehicle."""

from .dynamics import STATE_NAMES, SegmentPlan, TrajectoryPlan, simulate
from .gramian import (
    Gramian,
    analytic_circle_gramian,
    analytic_line_gramian,
    dubins_gramian,
    eigen_analysis,
    empirical_gramian,
)
from .rank import ControlMode, Model, check_lemma_suite, observability_rank
from .sensors import SensorKind, SensorSpec, bearing_sensor, gps, magnetometer, range_sensor

__version__ = "0.1.0"
