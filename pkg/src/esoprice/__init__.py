"""Indifference valuation of employee stock option packages with partial
exercise on a calibrated two-factor lattice."""

from .errors import (
    DegenerateBranch,
    DimensionMismatch,
    EmptyPolicy,
    EsoPriceError,
    InconsistentGrid,
    InfeasibleProbabilities,
    NoThreshold,
    SizeGuard,
)
from .exercise import ExerciseMode, OptionSpec, PolicyTable, ValueTable, critical_surface, employee_value, solve
from .kernel import excess_hedge, exercise_threshold, minimal_measure, optimal_hedge, price_g
from .lattice import ContinuousParams, Grid, StepParams, build, calibrate, grid_values
from .montecarlo import CostEstimate, SimConfig, simulate_cost, snap_to_grid

__version__ = "0.1.0"

__all__ = [
    "ContinuousParams",
    "CostEstimate",
    "DegenerateBranch",
    "DimensionMismatch",
    "EmptyPolicy",
    "EsoPriceError",
    "ExerciseMode",
    "Grid",
    "InconsistentGrid",
    "InfeasibleProbabilities",
    "NoThreshold",
    "OptionSpec",
    "PolicyTable",
    "SimConfig",
    "SizeGuard",
    "StepParams",
    "ValueTable",
    "build",
    "calibrate",
    "critical_surface",
    "employee_value",
    "excess_hedge",
    "exercise_threshold",
    "grid_values",
    "minimal_measure",
    "optimal_hedge",
    "price_g",
    "simulate_cost",
    "snap_to_grid",
    "solve",
]
