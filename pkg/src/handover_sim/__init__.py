"""Deterministic microgravity human-robot handover simulator.

A free-flying base with an n-link arm, a Cartesian impedance controller
with rigid and compliant presets, a handover finite state machine, and a
scripted human agent, wired together by a scenario-driven CLI harness that
logs CSV trajectories.
"""

from .config import RunDirection, ScenarioConfig, load_scenario, parse_scenario, shipped_scenario_names
from .errors import (
    ConfigError,
    HandoverSimError,
    IllegalTransitionError,
    NearSingularError,
    SolveFailureError,
)
from .harness import RunSummary, TrajectoryRecord, run_scenario, run_suite
from .impedance import GainSet, preset_gains
from .model import GeneralizedState, LinkParameters, LinkSpec
from .spatial import EulerAnglesRPY, HomogeneousTransform

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EulerAnglesRPY",
    "GainSet",
    "GeneralizedState",
    "HandoverSimError",
    "HomogeneousTransform",
    "IllegalTransitionError",
    "LinkParameters",
    "LinkSpec",
    "NearSingularError",
    "RunDirection",
    "RunSummary",
    "ScenarioConfig",
    "SolveFailureError",
    "TrajectoryRecord",
    "load_scenario",
    "parse_scenario",
    "preset_gains",
    "run_scenario",
    "run_suite",
    "shipped_scenario_names",
    "__version__",
]
