"""Simulation and constrained PSO tuning of an adaptive knee-exoskeleton controller."""

from .controller import ControllerGains, Estimates, ReferencePoint
from .evaluation import (ConstraintParams, ConstraintVector, ReferenceSpec, fitness_se,
                         is_feasible, step_constraints, total_violation)
from .plant import JointState, PlantParams
from .problem import StepResponseProblem
from .pso import OptimizationResult, PsoConfig, optimize
from .simulation import SimConfig, SimState, TrajectoryLog, simulate, simulate_batch

__version__ = "0.1.0"

__all__ = [
    "ConstraintParams", "ConstraintVector", "ControllerGains", "Estimates", "JointState",
    "OptimizationResult", "PlantParams", "PsoConfig", "ReferencePoint", "ReferenceSpec",
    "SimConfig", "SimState", "StepResponseProblem", "TrajectoryLog", "fitness_se",
    "is_feasible", "optimize", "simulate", "simulate_batch", "step_constraints",
    "total_violation",
]
