"""Post-processing of discrete trajectories: energy window, residuals, distances, recovery."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import ConfigurationError, DomainError, SolverError
from .functional import WedProblem, eval_functional
from .solvers import MinimizeResult, SolverOptions, el_residual_levels, minimize
from .spatial import Nonlinearity, phi
from .temporal import TimeSamples, Trajectory, backward_mean, discrete_derivative, interpolate


@dataclass(frozen=True)
class EnergyReport:
    value: float
    window: tuple[float, float]
    velocity: float
    gradient: float
    potential: float


@dataclass
class ConvergenceRecord:
    """Outcome of one minimize run in an eps sweep.

    Failed runs keep status "failed: <reason>" and NaN in the numeric fields.
    """

    eps: float
    tau: float
    dist_sup: float = math.nan
    dist_l2: float = math.nan
    energy: EnergyReport | None = None
    bc_res: tuple[float, float] = (math.nan, math.nan)
    u1_gap: float = math.nan
    iterations: int = 0
    status: str = "failed"
    objective: float = math.nan
    grad_norm: float = math.nan
    el_residual: float = math.nan
    traj: Trajectory | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return not self.status.startswith("failed")

    @property
    def energy_value(self) -> float:
        return self.energy.value if self.energy is not None else math.nan


def _need_domain(traj: Trajectory):
    if traj.domain is None:
        raise ConfigurationError("trajectory carries no spatial domain")
    return traj.domain


def energy_lhs(traj: Trajectory, nl: Nonlinearity) -> EnergyReport:
    """Velocity, gradient and potential integrals over the window (tau, T - 2 tau).

    On a uniform grid the window is exactly the union of the intervals
    ((i-1) tau, i tau] for i = 2..n-2. The velocity is piecewise constant there;
    the other two terms use the backward-constant interpolant u_i, so the
    potential integrand is 2 W(u_i) (= |u_i|^p for the pure power).
    """
    dom = _need_domain(traj)
    grid = traj.grid
    if grid.n < 5:
        raise ConfigurationError(f"energy window (tau, T - 2 tau) is empty for n={grid.n}; need n >= 5")
    tau, n = grid.tau, grid.n
    vel = discrete_derivative(traj.states, tau, 1)[1 : n - 2]  # delta u_i, i = 2..n-2
    u = traj.states[2 : n - 1]
    velocity = tau * float(np.sum(dom.inner(vel, vel)))
    if dom.kind == "scalar":
        gradient = 0.0
    else:
        g = dom.edge_differences(u)
        gradient = tau * dom.h * float(np.sum(g * g))
    potential = tau * dom.h * float(np.sum(2.0 * nl.W(u)))
    return EnergyReport(velocity + gradient + potential, (tau, grid.T - 2 * tau), velocity, gradient, potential)


def el_residual(traj: Trajectory, prob: WedProblem) -> float:
    """Largest spatial norm of the discrete Euler-Lagrange residual over levels 2..n-2."""
    res = el_residual_levels(traj.states, prob)
    return float(np.max(prob.domain.norm(res)))


def final_bc_residual(traj: Trajectory) -> tuple[float, float]:
    """Norms of the second and third backward differences at the final level."""
    tau = traj.grid.tau
    d2 = discrete_derivative(traj.states, tau, 2)[-1]
    d3 = discrete_derivative(traj.states, tau, 3)[-1]
    return float(traj.norms(d2[None])[0]), float(traj.norms(d3[None])[0])


def distance(traj: Trajectory, ref: TimeSamples, norm: str = "sup") -> float:
    """Distance between the affine interpolant of traj and a sampled reference.

    Compared at the reference sample times inside [0, T]. "sup" takes the
    largest spatial norm; "l2" integrates the squared norm by the trapezoid rule.
    """
    T = traj.grid.T
    slack = 1e-9 * T
    if ref.t[0] > slack or ref.t[-1] < T - slack:
        raise DomainError(f"reference covers [{ref.t[0]}, {ref.t[-1]}], need [0, {T}]")
    keep = (ref.t >= -slack) & (ref.t <= T + slack)
    ts = np.clip(ref.t[keep], 0.0, T)
    diff = interpolate(traj, ts) - ref.values[keep]
    d = traj.norms(diff)
    if norm == "sup":
        return float(np.max(d))
    if norm == "l2":
        return float(np.sqrt(trapezoid(d * d, ts)))
    raise ValueError(f"unknown norm {norm!r}; use 'sup' or 'l2'")


def recovery_trajectory(u_ref: Callable, prob: WedProblem, quad_points: int = 5) -> Trajectory:
    """u_0 = u0, u_1 = u0 + tau u1, and backward means of u_ref at i tau for i >= 2.

    `u_ref` maps an array of times to one state per time, e.g. a TimeSamples.
    """
    start = np.asarray(u_ref(np.array([0.0])), dtype=float).reshape(-1)
    if not np.allclose(start, prob.u0, rtol=1e-8, atol=1e-8):
        raise ConfigurationError("reference must start at the initial datum u0")
    tau, n = prob.tau, prob.n
    states = np.empty((n + 1, prob.domain.ndof))
    states[0] = prob.u0
    states[1] = prob.u0 + tau * prob.u1
    for i in range(2, n + 1):
        states[i] = backward_mean(u_ref, tau, i * tau, quad_points)
    return Trajectory(prob.grid, states, prob.domain)


def continuous_functional(
    u: Callable, u_tt: Callable, eps: float, nl: Nonlinearity, domain, T: float, samples: int = 20001
) -> float:
    """Composite Simpson value of int_0^T exp(-t/eps) (|u''|^2 / 2 + phi(u) / eps^2) dt."""
    if samples % 2 == 0:
        samples += 1
    t = np.linspace(0.0, T, samples)
    acc = np.asarray(u_tt(t), dtype=float).reshape(samples, -1)
    vals = np.asarray(u(t), dtype=float).reshape(samples, -1)
    integrand = np.exp(-t / eps) * (0.5 * domain.inner(acc, acc) + phi(vals, nl, domain) / eps**2)
    return float(simpson(integrand, x=t))


def recovery_gap(u_ref: Callable, prob: WedProblem, u_tt: Callable | None = None, samples: int = 20001) -> float:
    """I_discrete(recovery trajectory) minus the quadrature value of the continuous functional.

    Without `u_tt` the reference must offer .derivative(2) (as TimeSamples does).
    """
    if u_tt is None:
        u_tt = u_ref.derivative(2)
    rec = recovery_trajectory(u_ref, prob)
    cont = continuous_functional(u_ref, u_tt, prob.eps, prob.nl, prob.domain, prob.grid.T, samples)
    return eval_functional(rec, prob) - cont


def record_from_result(res: MinimizeResult, prob: WedProblem, reference: TimeSamples | None) -> ConvergenceRecord:
    traj = res.traj
    u1_gap = float(traj.norms(((traj.states[2] - traj.states[1]) / prob.tau - prob.u1)[None])[0])
    rec = ConvergenceRecord(
        eps=prob.eps,
        tau=prob.tau,
        energy=energy_lhs(traj, prob.nl) if prob.n >= 5 else None,
        bc_res=final_bc_residual(traj),
        u1_gap=u1_gap,
        iterations=res.newton_iters,
        status=res.status,
        objective=res.objective,
        grad_norm=res.grad_norm,
        el_residual=el_residual(traj, prob) if prob.n >= 5 else math.nan,
        traj=traj,
    )
    if reference is not None:
        rec.dist_sup = distance(traj, reference, "sup")
        rec.dist_l2 = distance(traj, reference, "l2")
    return rec


def _study_one(prob: WedProblem, eps: float, reference, opts) -> ConvergenceRecord:
    try:
        p = prob.with_eps(eps)
        return record_from_result(minimize(p, opts), p, reference)
    except (SolverError, ConfigurationError) as exc:
        return ConvergenceRecord(eps=float(eps), tau=prob.tau, status=f"failed: {exc}")


def check_eps_list(eps_list: Sequence[float], energy_checks: bool = True) -> list[float]:
    eps = [float(e) for e in eps_list]
    problems = []
    if not eps:
        problems.append("eps list is empty")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        problems.append("eps values must be positive")
    if any(a <= b for a, b in zip(eps, eps[1:])):
        problems.append("eps list must be strictly descending")
    if energy_checks and any(e >= 0.5 for e in eps):
        problems.append("eps must be < 1/2 when energy checks are enabled")
    if problems:
        raise ConfigurationError("; ".join(problems))
    return eps


def convergence_study(
    prob: WedProblem,
    eps_list: Sequence[float],
    reference: TimeSamples | None = None,
    opts: SolverOptions | None = None,
    jobs: int = 1,
    energy_checks: bool = True,
) -> list[ConvergenceRecord]:
    """One fresh minimize per eps on the grid of `prob`, returned in list order.

    Solver failures become records with a "failed" status. With jobs > 1 the
    runs go to worker processes, so custom potentials must be picklable.
    """
    eps = check_eps_list(eps_list, energy_checks)
    opts = opts or SolverOptions()
    if jobs <= 1 or len(eps) == 1:
        return [_study_one(prob, e, reference, opts) for e in eps]
    k = len(eps)
    with ProcessPoolExecutor(max_workers=min(jobs, k)) as pool:
        return list(pool.map(_study_one, [prob] * k, eps, [reference] * k, [opts] * k))
