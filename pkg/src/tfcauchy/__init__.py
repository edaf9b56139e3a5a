"""tfcauchy: solvers and verification tools for time-fractional Cauchy problems
with Bernstein-function spatial operators on an interval.

The package computes weak solutions of

    d^alpha/dt^alpha phi + Psi(-Laplacian) phi + V phi = F   in (0,T) x (a,b)
    phi = 0 outside (a,b),  phi(0) = phi0,  0 < alpha < 1,

by eigenfunction expansion with Mittag-Leffler relaxation, estimates the same
solutions probabilistically with killed subordinate Brownian motion run on an
inverse-subordinator clock, and verifies positivity, comparison, stability,
sup-norm (ABP-type) bounds, decay and inverse-source uniqueness numerically.
"""

__version__ = "0.1.0"

from .bernstein import (BernsteinFunction, Wlsc, check_complete_monotonicity,
                        check_hartman_wintner, classical_laplacian, fractional,
                        log_boosted, log_damped, psi_eval, relativistic,
                        sum_of_fractional, wlsc_verify)
from .errors import (ConfigError, DomainError, EvaluationError, IllPosedError,
                     ParameterError, SolverError, UnsupportedModeError)
from .inverse import (ChiKernel, ObservationTrace, chi_kernel,
                      forward_observation, recover_rho1, tikhonov_sweep)
from .operator import (DiscreteOperator, Domain1D, EigenSystem, MODE_JUMP,
                       MODE_SPECTRAL, build_operator, dirichlet_laplacian_eigensystem,
                       eigensystem, eigenvalue_ratio_report, fractional_norm)
from .principles import (PrincipleReport, abp_constant_study, abp_threshold,
                         check_abp, check_comparison, check_decay,
                         check_positivity, check_stability)
from .solver import (ProblemSpec, SeparableSource, SolutionField, TableSource,
                     apply_K, apply_S, caputo_l1_apply, caputo_l1_weights,
                     caputo_residual, duhamel_coefficients,
                     initial_trace_convergence, solve)
from .special import (MLParams, StableDensity, inverse_subordinator_density,
                      ml_eval, ml_half_closed_form, ml_laplace_residual,
                      ml_uniform_decay_constant, mittag_leffler, stable_density,
                      stable_density_series, stable_tail_constant)
from .stochastic import (McConfig, PathEnsemble, PointEstimate, RngSpec,
                         estimate_solution_mc, exit_time_moments,
                         sample_inverse_subordinator, sample_stable_subordinator,
                         simulate_killed_path, survival_curve)

__all__ = [name for name in dir() if not name.startswith("_")]
