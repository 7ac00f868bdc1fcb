"""Finite-volume solver and energy diagnostics for a parabolic-elliptic-elliptic
attraction-repulsion chemotaxis system with no-flux boundaries."""
from .conditions import ConditionReport, estimate_ps_constant, evaluate_conditions, neumann_lambda1
from .config import RunConfig, load_config, parse_config
from .diagnostics import EnergyMonitor, EnergyReport, stabilization_report
from .elliptic import EllipticProblem, solve_screened_poisson, solve_screened_poisson_dense
from .errors import (
    ChemofluxError,
    ConfigError,
    ConvergenceError,
    NegativityError,
    QuadratureError,
    StepFailure,
)
from .grid import Grid
from .model import ModelParams, PhiEvaluator, phi
from .stepper import RunResult, SimState, StepControl, run, step

__version__ = "0.1.0"
