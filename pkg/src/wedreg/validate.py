"""Cross-module invariant checks, run by ``wedreg validate`` and reused by the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .diagnostics import distance, recovery_gap
from .functional import (
    WedProblem,
    affine_free,
    embed,
    eval_functional,
    free_inner,
    gradient,
    hessian_apply,
    make_problem,
)
from .solvers import SolverOptions, minimize, solve_el, solve_limit
from .spatial import no_potential, power, scalar_domain


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def _upper(name, value, threshold, detail=""):
    return Check(name, float(value), float(threshold), bool(value <= threshold), detail)


def _lower(name, value, threshold, detail=""):
    return Check(name, float(value), float(threshold), bool(value >= threshold), detail)


def random_free(prob: WedProblem, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    return affine_free(prob) + scale * rng.standard_normal(prob.free_shape)


def gradient_fd_error(prob: WedProblem, probes: int = 5, seed: int = 0, step: float = 1e-5) -> float:
    """Largest relative error between central differences of I and <gradient, d> over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        z = random_free(prob, rng)
        d = rng.standard_normal(prob.free_shape)
        fd = (eval_functional(embed(z + step * d, prob), prob)
              - eval_functional(embed(z - step * d, prob), prob)) / (2 * step)
        exact = free_inner(gradient(embed(z, prob), prob), d, prob)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    return worst


def hessian_checks(prob: WedProblem, probes: int = 5, seed: int = 1) -> tuple[float, float]:
    """(largest relative asymmetry <Hx, y> - <x, Hy>, smallest <Hx, x> / <x, x>) over random probes."""
    rng = np.random.default_rng(seed)
    asym, curv = 0.0, np.inf
    for _ in range(probes):
        traj = embed(random_free(prob, rng), prob)
        x = rng.standard_normal(prob.free_shape)
        y = rng.standard_normal(prob.free_shape)
        hx, hy = hessian_apply(traj, x, prob), hessian_apply(traj, y, prob)
        a, b = free_inner(hx, y, prob), free_inner(x, hy, prob)
        asym = max(asym, abs(a - b) / max(abs(a), abs(b), 1e-300))
        curv = min(curv, free_inner(hx, x, prob) / free_inner(x, x, prob))
    return asym, curv


def recovery_orders(prob: WedProblem, u_ref, u_tt, halvings: int = 3) -> list[float]:
    gaps = []
    for k in range(halvings + 1):
        p = make_problem(prob.domain, prob.nl, prob.u0, prob.u1, prob.grid.T, prob.n * 2**k, prob.eps)
        gaps.append(abs(recovery_gap(u_ref, p, u_tt=u_tt)))
    return [float(np.log2(a / b)) for a, b in zip(gaps, gaps[1:])]


def run_checks(prob: WedProblem | None = None, opts: SolverOptions | None = None) -> list[Check]:
    """Invariant suite. `prob` sets the domain, potential and data (default: the scalar quartic case)."""
    if prob is None:
        prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 60, 0.2)
    opts = opts or SolverOptions()
    dom, nl = prob.domain, prob.nl
    small = make_problem(dom, nl, prob.u0, prob.u1, prob.grid.T, 20, prob.eps)
    checks = []

    rho, ratio = prob.rho, prob.eps / (prob.eps + prob.tau)
    rec = np.max(np.abs(rho[1:] - ratio * rho[:-1]) / rho[1:])
    checks.append(_upper("weight recurrence rho_i = r rho_(i-1)", rec, 1e-13))

    checks.append(_upper("gradient vs central differences", gradient_fd_error(small), 1e-6))
    asym, curv = hessian_checks(small)
    checks.append(_upper("Hessian symmetry", asym, 1e-12))
    checks.append(_lower("Hessian quadratic form", curv, 0.0))

    coarse = make_problem(dom, nl, prob.u0, prob.u1, prob.grid.T, min(prob.n, 60), prob.eps)
    scalar = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 100, 0.2)

    def paths():
        a, b = minimize(coarse, opts), solve_el(coarse, opts)
        gap = float(np.max(np.abs(a.traj.states - b.traj.states)))
        tol = 1e-8 if dom.kind == "scalar" else 1e-6
        c = minimize(coarse, opts, start=random_free(coarse, np.random.default_rng(7), 2.0))
        return [
            _upper("minimize vs solve_el (sup)", gap, tol, f"n={coarse.n} eps={coarse.eps:g}"),
            _upper("uniqueness from a random start", np.max(np.abs(c.traj.states - a.traj.states)), 1e-8),
        ]

    def affine():
        # phi vanishes identically only in the scalar model
        free = make_problem(scalar_domain(), no_potential(), [1.0], [0.5], 3.0, 40, 0.2)
        r = minimize(free, opts)
        err = float(np.max(np.abs(r.traj.states[2:] - affine_free(free))))
        return [_upper("affine minimizer without potential", max(err, abs(r.objective)), 1e-12)]

    def recovery():
        orders = recovery_orders(scalar, lambda t: np.cos(t)[:, None], lambda t: -np.cos(t)[:, None])
        return [_lower("recovery gap order (3 halvings)", min(orders), 0.8,
                       "orders " + " ".join(f"{o:.3f}" for o in orders))]

    def ordering():
        ref = solve_limit(scalar_domain(), power(4), [1.0], [0.0], 3.0, 1e-3)
        d = [distance(minimize(scalar.with_eps(e), opts).traj, ref, "sup") for e in (0.4, 0.1)]
        return [_upper("distance to limit shrinks with eps", d[1] / d[0], 1.0 - 1e-12,
                       "ratio of eps=0.1 to eps=0.4")]

    for group, names in ((paths, ["minimize vs solve_el (sup)", "uniqueness from a random start"]),
                         (affine, ["affine minimizer without potential"]),
                         (recovery, ["recovery gap order (3 halvings)"]),
                         (ordering, ["distance to limit shrinks with eps"])):
        try:
            checks.extend(group())
        except SolverError as exc:
            checks.extend(Check(name, np.nan, np.nan, False, f"solver failed: {exc}") for name in names)
    return checks
