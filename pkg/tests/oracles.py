"""Reference computations written independently of the package code paths."""

from fractions import Fraction

import numpy as np


def brute_functional(states, T, eps, p):
    """Exact rational value of the discrete functional for a scalar trajectory and W = |r|^p / 2."""
    states = [Fraction(s) for s in states]
    n = len(states) - 1
    tau = Fraction(T) / n
    r = Fraction(eps) / (Fraction(eps) + tau)
    total = Fraction(0)
    for i in range(2, n + 1):
        d2 = (states[i] - 2 * states[i - 1] + states[i - 2]) / tau**2
        total += tau * r**i * d2 * d2 / 2
    for i in range(2, n - 1):
        total += tau / Fraction(eps) ** 2 * r ** (i + 2) * abs(states[i]) ** p / 2
    return total


def dense_quadratic_minimizer(u0, u1, T, n, eps):
    """Scalar minimizer for W(r) = r^2 / 2 from the dense normal equations of the quadratic form."""
    tau = T / n
    ratio = eps / (eps + tau)
    rho = np.array([ratio**i for i in range(n + 1)])
    E = np.zeros((n + 1, n - 1))
    E[2:, :] = np.eye(n - 1)
    f = np.zeros(n + 1)
    f[0], f[1] = u0, u0 + tau * u1
    D = np.zeros((n - 1, n + 1))
    for j, i in enumerate(range(2, n + 1)):
        D[j, i - 2 : i + 1] = np.array([1.0, -2.0, 1.0]) / tau**2
    A = D.T @ np.diag(tau * rho[2:]) @ D
    for i in range(2, n - 1):
        A[i, i] += tau / eps**2 * rho[i + 2]
    H, b = E.T @ A @ E, -E.T @ A @ f
    s = 1.0 / np.sqrt(np.diag(H))
    z = s * np.linalg.solve(H * s[:, None] * s[None, :], s * b)
    return E @ z + f


def rk4_cos_error(dt):
    """Max error of solve_limit against cos t for u'' + u = 0 (used for order checks)."""
    from wedreg import quadratic, scalar_domain, solve_limit

    ref = solve_limit(scalar_domain(), quadratic(), [1.0], [0.0], 3.0, dt)
    return float(np.max(np.abs(ref.values[:, 0] - np.cos(ref.t))))
