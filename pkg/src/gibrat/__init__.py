"""Kinetic model of proportionate firm growth.

Firms change size through random multiplicative shocks ``x -> x (1 + eta)``.
The package simulates the kinetic model exactly, expands its transform in
Wild series, and evaluates the two scaling limits: a transport limit with a
collapsing mass at zero, and a diffusion limit with lognormal source
solutions.
"""

from .diffusion import (
    LognormalSource,
    bimodal_lognormal,
    check_initial_conditions,
    convergence_rate_fit,
    convergence_series,
    matched_source,
    solve,
    source_density,
    to_heat_frame,
    weighted_l1_distance,
)
from .effects import (
    EffectDistribution,
    growth_rate,
    make_discrete,
    make_scaled_bounded,
    make_symmetric_two_point,
    make_two_point_first_order,
    moment,
)
from .errors import ConfigError, DomainError, GibratError, NumericalError, ResourceError
from .first_order import cf_solution, density_solution, moment_law, transport_residual
from .fourier_metric import (
    AppendixBoundParams,
    MetricGridSpec,
    appendix_bound,
    d_s,
    verify_bound,
)
from .grids import CharacteristicFunctionGrid, GridDensity, log_grid, symmetric_log_grid
from .kinetic_mc import (
    Dirac,
    LognormalInitial,
    ParticleEnsemble,
    empirical_cf,
    empirical_moment,
    evolve_exact,
    init_ensemble,
)
from .oracles import (
    QuadratureSpec,
    brute_moment,
    heat_kernel,
    lognormal_cf_quadrature,
    pde_residual,
)
from .wild_series import dirac_cf, gamma_cf, lognormal_cf_approx, scaling_table, wild_cf

__version__ = "0.1.0"
