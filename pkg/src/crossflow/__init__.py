"""crossflow: a deterministic four-leg signalized-intersection microsimulator
with a dynamic phase-plan controller, benchmark controllers, a sensor-belt
detection subsystem and a replicated-experiment harness."""

from .intersection import (
    CONFLICTS,
    DETECTION_CAPACITY,
    LANE_OF,
    Movement,
    LaneState,
    PhasePlan,
    compatible_pairs,
    conflicts_with,
)
from .dt3p import DT3PController, LoadWeights, dt3p_decide
from .baselines import ActuatedController, ActuatedParams, FixedTimeController, FixedTimePlan
from .sim import MetricsRecord, SimConfig, run, simulate
from .experiments import DEMAND_LEVELS, GridConfig, rank_methods, run_grid, sample_size

__version__ = "0.1.0"

__all__ = [
    "CONFLICTS",
    "DETECTION_CAPACITY",
    "LANE_OF",
    "Movement",
    "LaneState",
    "PhasePlan",
    "compatible_pairs",
    "conflicts_with",
    "DT3PController",
    "LoadWeights",
    "dt3p_decide",
    "ActuatedController",
    "ActuatedParams",
    "FixedTimeController",
    "FixedTimePlan",
    "MetricsRecord",
    "SimConfig",
    "run",
    "simulate",
    "DEMAND_LEVELS",
    "GridConfig",
    "rank_methods",
    "run_grid",
    "sample_size",
]
