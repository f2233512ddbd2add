"""Balanced vanishing-viscosity solver and verification harness for 2D resonant
conservation laws ``u_t + f(k(x,y), u)_x + g(l(x,y), u)_y = 0`` with
discontinuous coefficients ``k``, ``l``."""
from .errors import (ConfigFileError, ConfigurationError, DivergenceError, ResolutionError,
                     ResonantError, StepError, SweepError)
from .fields import (Block, Grid2D, PiecewiseConstantCoeff, ScalarField2D, coarsen,
                     rasterize, read_snapshot, total_variation, write_snapshot)
from .flux import (FluxModel, check_invariant_region, check_nonlinearity, entropy_flux_F,
                   entropy_flux_G, entropy_flux_H, make_flux, register_flux,
                   singular_mapping_psi)
from .harness import (ConvergenceReport, SweepPlan, TestFunction, cauchy_rate,
                      plan_from_config, run_sweep, weak_residual)
from .kernels import BACKEND, HAVE_COMPILED
from .mollifier import MollifierKernel, mollify, prepare_initial_data
from .monitors import MonitorSeries, check_lemma_bounds, sample_monitors
from .scenarios import Scenario, list_scenarios, load_scenario, validate
from .solver import SolverConfig, SolverRun, advance_to, stable_timestep, step

__version__ = "0.1.0"
