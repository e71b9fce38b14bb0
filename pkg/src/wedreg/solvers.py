"""Newton solvers for the discrete problem and reference integrators for the limit equation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .errors import ConfigurationError, SolverError
from .functional import (
    WedProblem,
    affine_free,
    embed,
    eval_functional,
    free_inner,
    free_norm,
    gradient,
    hessian_apply,
    hessian_matrix,
)
from .spatial import SpatialDomain, grad_phi, phi
from .temporal import TimeSamples, Trajectory, discrete_derivative

STATUS_CONVERGED = "converged"
STATUS_ROUNDOFF = "roundoff"
STATUS_MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolverOptions:
    """Newton controls.

    tol_grad defaults to 1e-10 for the scalar model and 1e-8 on an interval.
    Besides reaching tol_grad, a run must take a Newton step below
    tol_step * max(1, |u|_inf) before it is declared converged; two such tiny
    steps without reaching tol_grad end the run with status "roundoff" (the
    gradient has hit its floating-point floor, which grows like tau**-4).
    """

    tol_grad: float | None = None
    max_newton: int = 100
    max_cg: int | None = None
    beta: float = 0.5
    c: float = 1e-4
    linear_solver: str = "direct"
    tol_step: float = 1e-12

    def __post_init__(self):
        if self.tol_grad is not None and not self.tol_grad > 0:
            raise ConfigurationError("tol_grad must be positive")
        if self.max_newton < 1 or (self.max_cg is not None and self.max_cg < 1):
            raise ConfigurationError("iteration caps must be >= 1")
        if not 0 < self.beta < 1:
            raise ConfigurationError("line search factor beta must lie in (0, 1)")
        if not 0 < self.c < 1:
            raise ConfigurationError("sufficient decrease constant c must lie in (0, 1)")
        if self.linear_solver not in ("direct", "cg"):
            raise ConfigurationError(f"unknown linear solver {self.linear_solver!r}")
        if not self.tol_step > 0:
            raise ConfigurationError("tol_step must be positive")

    def grad_tol(self, domain: SpatialDomain) -> float:
        if self.tol_grad is not None:
            return self.tol_grad
        return 1e-10 if domain.kind == "scalar" else 1e-8


@dataclass
class MinimizeResult:
    traj: Trajectory
    objective: float
    grad_norm: float
    newton_iters: int
    converged: bool
    status: str = STATUS_CONVERGED
    residual: float | None = None
    history: list = field(default_factory=list)


def _solve_direct(H: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    # symmetric diagonal scaling: the weights make the rows span many decades
    d = 1.0 / np.sqrt(H.diagonal())
    Dm = sp.diags(d)
    Hs = (Dm @ H @ Dm).tocsc()
    return d * spl.splu(Hs).solve(d * rhs)


def _newton_direction(traj, g, prob: WedProblem, opts: SolverOptions) -> np.ndarray:
    shape = prob.free_shape
    if opts.linear_solver == "direct":
        H = hessian_matrix(traj, prob)
        rhs = -(prob.tau * prob.domain.h) * g.ravel()
        return _solve_direct(H, rhs).reshape(shape)
    size = g.size
    diag = hessian_matrix(traj, prob).diagonal() / (prob.tau * prob.domain.h)
    op = spl.LinearOperator((size, size), dtype=float,
                            matvec=lambda v: hessian_apply(traj, v.reshape(shape), prob).ravel())
    prec = spl.LinearOperator((size, size), dtype=float, matvec=lambda v: v / diag)
    maxiter = opts.max_cg if opts.max_cg is not None else 10 * size
    x, _ = spl.cg(op, -g.ravel(), rtol=1e-12, atol=0.0, maxiter=maxiter, M=prec)
    return x.reshape(shape)


def minimize(prob: WedProblem, opts: SolverOptions | None = None, start=None) -> MinimizeResult:
    """Damped Newton with Armijo backtracking on the discrete functional.

    `start` holds (u_2, ..., u_n); the default is the affine trajectory
    u_i = u0 + i tau u1.
    """
    opts = opts or SolverOptions()
    tol = opts.grad_tol(prob.domain)
    z = affine_free(prob) if start is None else np.array(start, dtype=float).reshape(prob.free_shape)
    traj = embed(z, prob)
    f = eval_functional(traj, prob)
    history = []
    last_step, tiny_steps = np.inf, 0
    status = STATUS_MAX_ITER
    it = 0
    while True:
        g = gradient(traj, prob)
        gn = free_norm(g, prob)
        history.append({"objective": f, "grad_norm": gn, "step": last_step})
        if not (np.isfinite(f) and np.isfinite(gn)):
            raise SolverError("non-finite objective or gradient", history)
        if gn <= tol and (gn == 0.0 or last_step <= opts.tol_step * max(1.0, np.abs(z).max())):
            status = STATUS_CONVERGED
            break
        if tiny_steps >= 2:
            status = STATUS_ROUNDOFF
            break
        if it >= opts.max_newton:
            break
        it += 1
        d = _newton_direction(traj, g, prob, opts)
        slope = free_inner(g, d, prob)
        if not np.isfinite(slope) or slope >= 0:
            d, slope = -g, -gn * gn
        alpha = 1.0
        slack = 8 * np.finfo(float).eps * abs(f)
        while True:
            z_new = z + alpha * d
            traj_new = embed(z_new, prob) if np.all(np.isfinite(z_new)) else None
            f_new = eval_functional(traj_new, prob) if traj_new is not None else np.inf
            if f_new <= f + opts.c * alpha * slope + slack:
                break
            alpha *= opts.beta
            if alpha < 1e-14:
                raise SolverError("line search failed to decrease the objective", history)
        last_step = alpha * np.abs(d).max()
        tiny_steps = tiny_steps + 1 if last_step <= opts.tol_step * max(1.0, np.abs(z).max()) else 0
        z, traj, f = z_new, traj_new, f_new
    return MinimizeResult(traj, f, gn, it, status == STATUS_CONVERGED, status, history=history)


def _el_full(z, prob: WedProblem) -> np.ndarray:
    """Trajectory from (u_2..u_{n-2}) with u_{n-1}, u_n fixed by delta^2 u_n = delta^3 u_n = 0."""
    u = np.empty((prob.n + 1, prob.domain.ndof))
    u[0] = prob.u0
    u[1] = prob.u0 + prob.tau * prob.u1
    u[2:prob.n - 1] = z
    u[prob.n - 1] = 2.0 * u[prob.n - 2] - u[prob.n - 3]
    u[prob.n] = 2.0 * u[prob.n - 1] - u[prob.n - 2]
    return u


def el_residual_levels(states, prob: WedProblem) -> np.ndarray:
    """eps^2 delta^4 u_{i+2} - 2 eps delta^3 u_{i+1} + delta^2 u_i + A u_i for i = 2..n-2."""
    n, tau, eps = prob.n, prob.tau, prob.eps
    d4 = discrete_derivative(states, tau, 4)
    d3 = discrete_derivative(states, tau, 3)[: n - 3]
    d2 = discrete_derivative(states, tau, 2)[: n - 3]
    return eps**2 * d4 - 2.0 * eps * d3 + d2 + grad_phi(states[2:n - 1], prob.nl, prob.domain)


def _el_jacobian(states, prob: WedProblem) -> sp.csc_matrix:
    n, tau, eps, dom = prob.n, prob.tau, prob.eps, prob.domain
    N = n - 3
    rows, cols, vals = [], [], []
    stencils = [
        (np.arange(-2, 3), eps**2 / tau**4 * np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
        (np.arange(-2, 2), -2.0 * eps / tau**3 * np.array([-1.0, 3.0, -3.0, 1.0])),
        (np.arange(-2, 1), 1.0 / tau**2 * np.array([1.0, -2.0, 1.0])),
    ]
    r = np.arange(N)
    for offsets, coefs in stencils:
        for off, cf in zip(offsets, coefs):
            rows.append(r)
            cols.append(r + 2 + off)
            vals.append(np.full(N, cf))
    L = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, n + 1))
    # d u / d z: identity on u_2..u_{n-2}, plus the eliminated final states
    # u_{n-1} = 2 u_{n-2} - u_{n-3},  u_n = 3 u_{n-2} - 2 u_{n-3}  (u_{n-3} may be the fixed u_1)
    prow = [np.arange(2, n - 1), [n - 1, n], [n - 1, n]]
    pcol = [np.arange(N), [N - 1, N - 1], [N - 2, N - 2]]
    pval = [np.ones(N), [2.0, 3.0], [-1.0, -2.0]]
    if N < 2:
        prow, pcol, pval = prow[:2], pcol[:2], pval[:2]
    P = sp.csr_matrix((np.concatenate(pval), (np.concatenate(prow), np.concatenate(pcol))), shape=(n + 1, N))
    time_op = (L @ P).tocsr()
    J = sp.kron(time_op, sp.identity(dom.ndof), format="csr")
    J = J + sp.kron(sp.identity(N), dom.stiffness_matrix(), format="csr")
    J = J + sp.diags(prob.nl.d2W(states[2:n - 1]).ravel())
    return J.tocsc()


def solve_el(prob: WedProblem, opts: SolverOptions | None = None, start=None) -> MinimizeResult:
    """Newton's method on the discrete Euler-Lagrange system with the final conditions eliminated.

    The residual is evaluated through chained backward differences, which keeps
    its rounding error near the level of the data; the Jacobian is assembled
    from the equivalent stencils.
    """
    opts = opts or SolverOptions()
    if prob.n < 5:
        raise ConfigurationError("solve_el needs n >= 5")
    tol = opts.grad_tol(prob.domain)
    n = prob.n
    z = (affine_free(prob)[: n - 3] if start is None
         else np.array(start, dtype=float).reshape(n - 3, prob.domain.ndof))
    u = _el_full(z, prob)
    F = el_residual_levels(u, prob)
    history = []
    last_step, tiny_steps = np.inf, 0
    status = STATUS_MAX_ITER
    it = 0
    while True:
        res = float(np.max(prob.domain.norm(F)))
        history.append({"residual": res, "step": last_step})
        if not np.isfinite(res):
            raise SolverError("Euler-Lagrange Newton iteration diverged", history)
        if res <= tol and (res == 0.0 or last_step <= opts.tol_step * max(1.0, np.abs(z).max())):
            status = STATUS_CONVERGED
            break
        if tiny_steps >= 2:
            status = STATUS_ROUNDOFF
            break
        if it >= opts.max_newton:
            break
        it += 1
        J = _el_jacobian(u, prob)
        s = spl.splu(J).solve(-F.ravel()).reshape(z.shape)
        small = opts.tol_step * max(1.0, np.abs(z).max())
        merit = np.linalg.norm(F)
        alpha = 1.0
        while True:
            z_new = z + alpha * s
            u_new = _el_full(z_new, prob)
            F_new = el_residual_levels(u_new, prob)
            if alpha * np.abs(s).max() <= small:
                break
            if np.linalg.norm(F_new) <= (1.0 - opts.c * alpha) * merit:
                break
            alpha *= opts.beta
            if alpha < 1e-10:
                raise SolverError("Euler-Lagrange Newton step failed to reduce the residual", history)
        last_step = alpha * np.abs(s).max()
        tiny_steps = tiny_steps + 1 if last_step <= small else 0
        z, u, F = z_new, u_new, F_new
    traj = Trajectory(prob.grid, u, prob.domain)
    gn = free_norm(gradient(traj, prob), prob)
    return MinimizeResult(traj, eval_functional(traj, prob), gn, it, status == STATUS_CONVERGED,
                          status, residual=res, history=history)


def limit_energy(u, v, nl, domain: SpatialDomain):
    """Conserved energy 1/2 |u_t|^2 + phi(u) of u_tt - Laplacian u + W'(u) = 0."""
    return 0.5 * domain.inner(v, v) + phi(u, nl, domain)


def solve_limit(domain: SpatialDomain, nl, u0, u1, T: float, dt: float, out_every: int = 1) -> TimeSamples:
    """Reference solution of u_tt - Laplacian u + W'(u) = 0, u(0) = u0, u_t(0) = u1.

    Scalar model: classical RK4 on (u, u_t). Interval: leapfrog (explicit central
    differences) with a Taylor first step; needs dt <= 0.9 h. The step is
    shrunk to T / ceil(T / dt) so the last sample lands on T. Samples are kept
    every `out_every` steps; the velocity samples are attached as `.velocity`.
    """
    if not dt > 0 or not T > 0:
        raise ConfigurationError("T and dt must be positive")
    steps = int(np.ceil(T / dt - 1e-9))
    if steps % out_every:
        raise ConfigurationError(f"out_every={out_every} must divide the {steps} steps")
    dt = T / steps
    u = np.array(domain.check(u0), dtype=float)
    v = np.array(domain.check(u1), dtype=float)

    def accel(w):
        return -grad_phi(w, nl, domain)

    us, vs = [u.copy()], [v.copy()]
    if domain.kind == "scalar":
        for k in range(1, steps + 1):
            k1u, k1v = v, accel(u)
            k2u, k2v = v + 0.5 * dt * k1v, accel(u + 0.5 * dt * k1u)
            k3u, k3v = v + 0.5 * dt * k2v, accel(u + 0.5 * dt * k2u)
            k4u, k4v = v + dt * k3v, accel(u + dt * k3u)
            u = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
            v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            if k % out_every == 0:
                us.append(u)
                vs.append(v)
    else:
        if dt > 0.9 * domain.h:
            raise ConfigurationError(f"CFL violated: dt={dt:g} > 0.9 h = {0.9 * domain.h:g}")
        prev, cur = u, u + dt * v + 0.5 * dt * dt * accel(u)
        for k in range(1, steps + 1):
            nxt = 2.0 * cur - prev + dt * dt * accel(cur)
            if k % out_every == 0:
                us.append(cur)
                vs.append((nxt - prev) / (2.0 * dt))
            prev, cur = cur, nxt
    t = dt * out_every * np.arange(len(us))
    return TimeSamples(t, np.array(us), domain, velocity=np.array(vs))

