"""Elliptic-in-time regularization of semilinear wave equations by weighted energy-dissipation minimization."""

from .diagnostics import (
    ConvergenceRecord,
    EnergyReport,
    continuous_functional,
    convergence_study,
    distance,
    el_residual,
    energy_lhs,
    final_bc_residual,
    recovery_gap,
    recovery_trajectory,
)
from .errors import ConfigurationError, DimensionError, DomainError, SolverError
from .functional import WedProblem, eval_functional, gradient, hessian_apply, make_problem
from .solvers import MinimizeResult, SolverOptions, minimize, solve_el, solve_limit
from .spatial import (
    Nonlinearity,
    SpatialDomain,
    grad_phi,
    interval_domain,
    klein_gordon,
    no_potential,
    phi,
    power,
    quadratic,
    scalar_domain,
)
from .temporal import TimeGrid, TimeSamples, Trajectory, build_grid, build_weights, discrete_derivative, interpolate

__version__ = "0.1.0"
