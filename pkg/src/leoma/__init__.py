"""Movable-antenna beamforming for a LEO ground station."""

__version__ = "0.1.0"

from .channel import StationConfig, build_slots
from .exceptions import (
    DegenerateGeometryError,
    InvalidConfigError,
    InvalidWeightsError,
    NumericalDegeneracyError,
)
from .orbit import ShellConfig, make_time_grid
from .scenario import ScenarioError, ScenarioSpec, parse_scenario
from .solver import SCHEMES, SolveResult, SolverConfig, optimize

__all__ = [
    "DegenerateGeometryError",
    "InvalidConfigError",
    "InvalidWeightsError",
    "NumericalDegeneracyError",
    "SCHEMES",
    "ScenarioError",
    "ScenarioSpec",
    "ShellConfig",
    "SolveResult",
    "SolverConfig",
    "StationConfig",
    "build_slots",
    "make_time_grid",
    "optimize",
    "parse_scenario",
]
