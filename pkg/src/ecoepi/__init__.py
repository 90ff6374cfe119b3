"""Diffusive prey / susceptible predator / infected predator model toolkit."""

from __future__ import annotations

from ecoepi.equilibria import Equilibrium, find_equilibria, reduce_equilibrium_system, select_equilibrium
from ecoepi.errors import (DivergenceError, EcoEpiError, EquilibriumReductionError, NumericalError,
                           ValidationError)
from ecoepi.model import Jacobian3, jacobian_at, kinetics
from ecoepi.params import ModelParams, base_params, table3_params, turing_params
from ecoepi.patterns import PatternReport, classify, snapshot_distance
from ecoepi.pde import FieldGrid, GridSpec, SnapshotSchedule, ftcs_step, initial_condition, simulate
from ecoepi.stability import (a_priori_bounds, check_global_stability_conditions,
                              check_local_stability_conditions, temporal_stability)
from ecoepi.temporal import (LyapunovSettings, bifurcation_sweep, integrate_rk4, lyapunov_spectrum)
from ecoepi.turing import dispersion, nonexistence_thresholds, region_scan, turing_check

__version__ = "0.1.0"

__all__ = [
    "DivergenceError", "EcoEpiError", "Equilibrium", "EquilibriumReductionError", "FieldGrid", "GridSpec",
    "Jacobian3", "LyapunovSettings", "ModelParams", "NumericalError", "PatternReport", "SnapshotSchedule",
    "ValidationError", "a_priori_bounds", "base_params", "bifurcation_sweep",
    "check_global_stability_conditions", "check_local_stability_conditions", "classify", "dispersion",
    "find_equilibria", "ftcs_step", "initial_condition", "integrate_rk4", "jacobian_at", "kinetics",
    "lyapunov_spectrum", "nonexistence_thresholds", "reduce_equilibrium_system", "region_scan",
    "select_equilibrium", "simulate", "snapshot_distance", "table3_params", "temporal_stability",
    "turing_check", "turing_params",
]
