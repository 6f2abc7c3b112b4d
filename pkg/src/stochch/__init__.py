"""Numerical lab for the viscous stochastic Camassa-Holm equation with transport noise."""
from .grid import Field, Grid, make_grid
from .sde import SimConfig, State, run_ensemble, simulate_path

__all__ = ["Field", "Grid", "make_grid", "SimConfig", "State", "run_ensemble", "simulate_path"]
__version__ = "0.1.0"
