"""Viscous shock profiles of ``u_t + f(u)_x = (u^(m-1) u_x)_x`` with ``1/2 < m < 1``."""

from fastdiff_shock.errors import ConfigError, NewtonError, ProfileError, ShiftInvariantError
from fastdiff_shock.flux import FluxModel, check_admissibility
from fastdiff_shock.profile import ProfileTable, build_profile, find_xi_star
from fastdiff_shock.shift import ShiftState, solve_d0
from fastdiff_shock.solver import Bump, Grid1D, RunSettings, SolverConfig, run

__version__ = "0.1.0"

__all__ = [
    "Bump", "ConfigError", "FluxModel", "Grid1D", "NewtonError", "ProfileError", "ProfileTable",
    "RunSettings", "ShiftInvariantError", "ShiftState", "SolverConfig", "build_profile",
    "check_admissibility", "find_xi_star", "run", "solve_d0",
]
