"""
One-dimensional Poisson-Nernst-Planck solver with an optional drag coupling
between the two ion species, plus a general inhomogeneous diffusion solver.
"""
from .config import SimulationConfig, parse_config, preset_config, render_config
from .functionals import (FunctionalReport, dissipation_classical, dissipation_modified,
                          effective_velocities, total_energy)
from .general_diffusion import DiffusionProblem, equilibrium_of, run_general_diffusion
from .mesh_linalg import Mesh1D, bernoulli, build_mesh, integrate
from .nernst_planck import PhysicalParams, coupling_coefficients, friction_matrix
from .poisson import PoissonBC, solve_poisson
from .time_integrator import IonState, SolverControls, run_to_steady, step

__version__ = "0.1.0"

__all__ = [
    "SimulationConfig", "parse_config", "preset_config", "render_config",
    "FunctionalReport", "dissipation_classical", "dissipation_modified",
    "effective_velocities", "total_energy",
    "DiffusionProblem", "equilibrium_of", "run_general_diffusion",
    "Mesh1D", "bernoulli", "build_mesh", "integrate",
    "PhysicalParams", "coupling_coefficients", "friction_matrix",
    "PoissonBC", "solve_poisson",
    "IonState", "SolverControls", "run_to_steady", "step",
]
