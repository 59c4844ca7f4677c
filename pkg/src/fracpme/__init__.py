"""Pseudo-spectral simulation of a nonlocal porous-medium system."""

from .grid import Grid, make_grid
from .simulation import PorousMediumSolver, Trajectory
from .state import (CosinePerturbation, FromSnapshot, GaussianBump, Params, State, Zero,
                    admissibility_report, make_initial)
from .stepper import StepperConfig, cfl_dt, pressure_step, step, transport_step

__version__ = "0.1.0"
