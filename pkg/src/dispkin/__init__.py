"""Kinetic solvers for two-species gas mixtures with disparate masses.

Inter-species collisions are evaluated either by a truncated expansion in the
square-root mass ratio (AE) or by a rescaled Fourier spectral method (SP);
time stepping uses a BGK-penalized asymptotic-preserving scheme.
"""
from .errors import (ConfigError, DegenerateDensityError, DispkinError, InstabilityError,
                     InvalidStateError, NumericalError, OutputError, StiffnessError)
from .grid import (CartesianGrid, PolarGrid, angular_moment, build_cartesian, build_polar,
                   interp_cart_to_polar, interp_polar_to_cart, radial_derivative, restrict)
from .moments import (MacroState, double_peak, maxwellian, moments, rel_l2, relative_entropy,
                      second_moment_tensor)
from .ae import q_hl0, q_hl1, q_hl_ae, q_lh0, q_lh1, q_lh2, q_lh_ae, ae_pair
from .intra import IntraKernel, precompute_intra_modes, q_intra
from .sp import SpKernel, precompute_sp_modes, q_hl_sp, q_lh_sp, sp_pair
from .stepper import (CollisionModel, Kernels, MixtureState, MomentUpdateResult, StepConfig,
                      ap_step, euler_step, penalty_rates, resolve_tau, update_moments)
from .macro import MacroPair, lambda_coeff, relax_exact, relax_temperatures
from .experiments import (SimConfig, load_config, parse_config, read_csv, run_compare,
                          run_convergence, run_epochal, run_single_step, serialize_config,
                          simulate, write_csv)

__version__ = "0.1.0"
