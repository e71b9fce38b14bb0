"""The discrete weighted energy-dissipation functional and its derivatives.

For a trajectory (u_0, ..., u_n) with u_0 = u0 and delta u_1 = u1,

    I(u) = sum_{i=2}^{n}   tau rho_i / 2 |delta^2 u_i|^2
         + sum_{i=2}^{n-2} tau / eps^2 rho_{i+2} phi(u_i).

The free variables are (u_2, ..., u_n), stored as an array of shape
(n - 1, ndof). Gradients are Riesz representatives in the product
<a, b> = tau sum_k (a_k, b_k)_{L2}, so their norms do not scale with n.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DimensionError
from .spatial import Nonlinearity, SpatialDomain, grad_phi, hess_phi_apply, phi
from .temporal import TimeGrid, Trajectory, WeightVector, build_grid, build_weights, discrete_derivative

# Test hook for the validator: names listed here alter the production path.
_FAULTS: set[str] = set()
KNOWN_FAULTS = ("grad-sign",)


@contextlib.contextmanager
def inject_fault(name: str):
    """Temporarily corrupt the gradient ("grad-sign" flips the potential term's sign)."""
    if name not in KNOWN_FAULTS:
        raise ValueError(f"unknown fault {name!r}; known: {KNOWN_FAULTS}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


@dataclass(frozen=True)
class WedProblem:
    domain: SpatialDomain
    nl: Nonlinearity
    u0: np.ndarray
    u1: np.ndarray
    grid: TimeGrid
    eps: float
    weights: WeightVector

    @property
    def tau(self) -> float:
        return self.grid.tau

    @property
    def rho(self) -> np.ndarray:
        return self.weights.rho

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def free_shape(self) -> tuple[int, int]:
        return (self.grid.n - 1, self.domain.ndof)

    def with_eps(self, eps: float) -> WedProblem:
        return WedProblem(self.domain, self.nl, self.u0, self.u1, self.grid, float(eps),
                          build_weights(self.grid, eps))


def make_problem(domain, nl, u0, u1, T, n, eps) -> WedProblem:
    grid = build_grid(T, n)
    u0 = np.array(domain.check(u0), dtype=float)
    u1 = np.array(domain.check(u1), dtype=float)
    if u0.ndim != 1 or u1.ndim != 1:
        raise ConfigurationError("initial data must be single states")
    for u in (u0, u1):
        u.setflags(write=False)
    return WedProblem(domain, nl, u0, u1, grid, float(eps), build_weights(grid, eps))


def affine_free(prob: WedProblem) -> np.ndarray:
    """Free part of u_i = u0 + i tau u1, the default Newton start."""
    i = np.arange(2, prob.n + 1)[:, None]
    return prob.u0[None, :] + i * prob.tau * prob.u1[None, :]


def embed(free, prob: WedProblem) -> Trajectory:
    free = np.asarray(free, dtype=float)
    if free.ndim == 1 and prob.domain.ndof == 1:
        free = free[:, None]
    if free.shape != prob.free_shape:
        raise DimensionError(f"free variables must have shape {prob.free_shape}, got {free.shape}")
    head = np.stack([prob.u0, prob.u0 + prob.tau * prob.u1])
    return Trajectory(prob.grid, np.concatenate([head, free]), prob.domain)


def _second_differences(states, prob):
    # row j holds delta^2 u_{j+2}, j = 0..n-2
    return discrete_derivative(states, prob.tau, 2)


def eval_functional(traj: Trajectory, prob: WedProblem) -> float:
    rho, tau, dom = prob.rho, prob.tau, prob.domain
    w = _second_differences(traj.states, prob)
    inertial = 0.5 * tau * np.sum(rho[2:] * dom.inner(w, w))
    energy = tau / prob.eps**2 * np.sum(rho[4:] * phi(traj.states[2:prob.n - 1], prob.nl, dom))
    return float(inertial + energy)


def _inertial_riesz(q, tau):
    # (q_k - 2 q_{k+1} + q_{k+2}) / tau^2 with q beyond index n taken as 0
    out = q.copy()
    out[:-1] -= 2.0 * q[1:]
    out[:-2] += q[2:]
    return out / tau**2


def gradient(traj: Trajectory, prob: WedProblem) -> np.ndarray:
    """Riesz gradient with respect to (u_2, ..., u_n), shape (n - 1, ndof)."""
    rho, n = prob.rho, prob.n
    w = _second_differences(traj.states, prob)
    g = _inertial_riesz(rho[2:, None] * w, prob.tau)
    pot = rho[4:, None] / prob.eps**2 * grad_phi(traj.states[2:n - 1], prob.nl, prob.domain)
    if "grad-sign" in _FAULTS:
        pot = -pot
    g[: n - 3] += pot
    return g


def hessian_apply(traj: Trajectory, direction, prob: WedProblem) -> np.ndarray:
    """Riesz Hessian of I at traj applied to a free-variable direction."""
    rho, n = prob.rho, prob.n
    d = np.asarray(direction, dtype=float).reshape(prob.free_shape)
    full = np.concatenate([np.zeros((2, prob.domain.ndof)), d])
    w = _second_differences(full, prob)
    out = _inertial_riesz(rho[2:, None] * w, prob.tau)
    out[: n - 3] += rho[4:, None] / prob.eps**2 * hess_phi_apply(
        traj.states[2:n - 1], d[: n - 3], prob.nl, prob.domain
    )
    return out


def free_inner(a, b, prob: WedProblem) -> float:
    return float(prob.tau * np.sum(prob.domain.inner(a, b)))


def free_norm(a, prob: WedProblem) -> float:
    return float(np.sqrt(free_inner(a, a, prob)))


def second_difference_matrix(n: int, tau: float) -> sp.csr_matrix:
    """Rows i = 2..n, columns u_0..u_n: (u_i - 2 u_{i-1} + u_{i-2}) / tau^2."""
    r = np.arange(n - 1)
    data = np.concatenate([np.ones(n - 1), -2.0 * np.ones(n - 1), np.ones(n - 1)]) / tau**2
    return sp.csr_matrix((data, (np.tile(r, 3), np.concatenate([r + 2, r + 1, r]))), shape=(n - 1, n + 1))


def hessian_matrix(traj: Trajectory, prob: WedProblem) -> sp.csr_matrix:
    """Euclidean Hessian of I in the flattened free variables (time-major).

    Equals tau * h times the matrix of hessian_apply; used for direct Newton solves.
    """
    rho, tau, n, dom = prob.rho, prob.tau, prob.n, prob.domain
    D = second_difference_matrix(n, tau)[:, 2:]
    time_op = (D.T @ sp.diags(tau * rho[2:]) @ D).tocsr()
    H = sp.kron(time_op, dom.h * sp.identity(dom.ndof), format="csr")
    coef = np.zeros(n - 1)
    coef[: n - 3] = tau / prob.eps**2 * rho[4:] * dom.h
    curv = np.zeros((n - 1, dom.ndof))
    curv[: n - 3] = prob.nl.d2W(traj.states[2:n - 1])
    H = H + sp.kron(sp.diags(coef), dom.stiffness_matrix(), format="csr")
    H = H + sp.diags((coef[:, None] * curv).ravel())
    return H.tocsr()
