"""Vibration damping of a mass block by a shape-memory-alloy rod.

Landau-Ginzburg thermo-mechanical rod model, Chebyshev collocation in
space and BDF time stepping with Newton iteration.
"""

from .config import PRESETS, ScenarioConfig, load_config
from .diagnostics import EnergyReport, classify_phases, energy_report, loop_dissipation, switching_count
from .errors import (ConfigError, DomainError, NonConvergence, NonFiniteState, SingularJacobian,
                     SmaDampError)
from .grid import Grid, build_grid, differentiate, integrate, interpolate
from .integrator import SolverConfig, Trajectory, newton_solve, run, step
from .material import MaterialParams, effective_stress, landau_energy, stationary_strains, stress
from .rod import BlockParams, RodState, initial_state, residual

__version__ = "0.1.0"
