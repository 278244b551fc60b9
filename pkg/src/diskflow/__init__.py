"""Slightly compressible flow around a shrinking penalized rigid disk.

The package pairs an explicit finite-volume solver for the scaled isentropic
system (pressure stiffness 1/eps^2m, Brinkman-penalized disk of radius eps)
with an incompressible projection reference, a family of solenoidal test
fields that vanish on the disk, and a sweep harness that measures how the
compressible solution approaches the incompressible one as eps shrinks.
"""

from .body import (BodyState, CirclePath, LinePath, StaticPath,
                   co_moving_circle, disk_inertia, disk_mass, grazing_line)
from .compressible import (EnergyReport, RunResult, SimState, SolverConfig,
                           SpaceTimeBump, StabilityError, body_force,
                           body_update, energy_report, energy_violation,
                           init_well_prepared, peak_dissipation_rate,
                           renormalized_residual, run, stable_dt, step)
from .config import (ConfigError, build_reference_config, build_solver_config,
                     build_sweep_config, build_testfunction_spec, load_config)
from .constitutive import (FluidParams, clamp_density, dissipation_density,
                           essential_residual_split, pressure,
                           pressure_potential, relative_energy, stress)
from .grid import (BodyMask, GridSpec, ScalarField, VectorField, body_mask,
                   divergence, gradient, laplacian, norm_l2, norm_lp,
                   norm_w12, perp_gradient, vector_laplacian,
                   velocity_gradients)
from .harness import (SweepConfig, SweepRow, compare_runs, emit_report,
                      grid_rule, parse_report, run_rung, run_sweep)
from .incompressible import (IncState, ProjectionError, ReferenceConfig,
                             RefResult, kinetic_energy, project,
                             run_reference, step_inc, step_reference)
from .initial import initial_velocity, stream_bump
from .runio import (EnergyCheckError, check_energy, load_run, save_reference,
                    save_run)
from .testfunctions import (TestFunctionSpec, alpha_of_eps, chi_eps,
                            cutoff_eta, phi_eps, phi_field, phi_tilde,
                            remainder_terms, testfunction_report,
                            verifier_trajectory, weak_momentum_residual)

__version__ = "0.1.0"

__all__ = [
    "BodyMask", "BodyState", "CirclePath", "ConfigError", "EnergyCheckError",
    "EnergyReport", "FluidParams", "GridSpec", "IncState", "LinePath",
    "ProjectionError", "RefResult", "ReferenceConfig", "RunResult",
    "ScalarField", "SimState", "SolverConfig", "SpaceTimeBump",
    "StabilityError", "StaticPath", "SweepConfig", "SweepRow",
    "TestFunctionSpec", "VectorField", "alpha_of_eps", "body_force",
    "body_mask", "body_update", "build_reference_config",
    "build_solver_config", "build_sweep_config", "build_testfunction_spec",
    "check_energy", "chi_eps", "clamp_density", "co_moving_circle",
    "compare_runs", "cutoff_eta", "disk_inertia", "disk_mass", "divergence",
    "dissipation_density", "emit_report", "energy_report", "energy_violation",
    "essential_residual_split", "gradient", "grazing_line", "grid_rule",
    "init_well_prepared", "initial_velocity", "kinetic_energy", "laplacian",
    "load_config", "load_run", "norm_l2", "norm_lp", "norm_w12",
    "parse_report", "peak_dissipation_rate", "perp_gradient", "phi_eps",
    "phi_field", "phi_tilde", "pressure", "pressure_potential", "project",
    "relative_energy", "remainder_terms", "renormalized_residual", "run",
    "run_reference", "run_rung", "run_sweep", "save_reference", "save_run",
    "stable_dt", "step", "step_inc", "step_reference", "stream_bump",
    "stress", "testfunction_report", "vector_laplacian",
    "velocity_gradients", "verifier_trajectory", "weak_momentum_residual",
]
