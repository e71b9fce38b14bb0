"""Uniform time grids, exponential discrete weights and discrete-in-time operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, DimensionError, DomainError

if TYPE_CHECKING:
    from .spatial import SpatialDomain

MIN_STEPS = 4


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into n steps of size tau."""

    T: float
    n: int
    tau: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "tau", self.T / self.n)

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.n + 1)


def build_grid(T: float, n: int) -> TimeGrid:
    if not np.isfinite(T) or T <= 0:
        raise ConfigurationError(f"T must be positive, got {T}")
    if int(n) != n or n < MIN_STEPS:
        raise ConfigurationError(f"n too small: need an integer n >= {MIN_STEPS}, got {n}")
    return TimeGrid(float(T), int(n))


@dataclass(frozen=True)
class WeightVector:
    """rho_i = (eps / (eps + tau))**i, i = 0..n: backward Euler for rho' = -rho / eps."""

    rho: np.ndarray
    eps: float


def build_weights(grid: TimeGrid, eps: float) -> WeightVector:
    if not np.isfinite(eps) or eps <= 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    ratio = eps / (eps + grid.tau)
    rho = ratio ** np.arange(grid.n + 1, dtype=float)
    if rho[-1] < np.finfo(float).tiny:
        raise ConfigurationError(
            f"discrete weight rho_n underflows for eps={eps}, n={grid.n}; "
            "use a larger eps or a shorter horizon"
        )
    rho.setflags(write=False)
    return WeightVector(rho, float(eps))


def discrete_derivative(values, tau: float, k: int = 1) -> np.ndarray:
    """k-fold backward difference quotient along axis 0.

    Entry j of the result is delta^k w_{j+k}; the output has len(values) - k rows.
    """
    values = np.asarray(values, dtype=float)
    if k < 1:
        raise ValueError("order k must be >= 1")
    if values.shape[0] < k + 1:
        raise DimensionError(f"need at least {k + 1} samples for delta^{k}, got {values.shape[0]}")
    out = values
    for _ in range(k):
        out = np.diff(out, axis=0) / tau
    return out


@dataclass(frozen=True)
class Trajectory:
    """States u_0..u_n on a TimeGrid; states has shape (n + 1, ndof)."""

    grid: TimeGrid
    states: np.ndarray
    domain: SpatialDomain | None = None

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.shape[0] != self.grid.n + 1:
            raise DimensionError(
                f"trajectory needs {self.grid.n + 1} states, got {states.shape[0]}"
            )
        if self.domain is not None and states.shape[1] != self.domain.ndof:
            raise DimensionError(
                f"states have {states.shape[1]} dofs, domain has {self.domain.ndof}"
            )
        if not np.all(np.isfinite(states)):
            raise ValueError("trajectory contains non-finite entries")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def ndof(self) -> int:
        return self.states.shape[1]

    def norms(self, states: np.ndarray) -> np.ndarray:
        """Spatial norm of each row of `states` (shape (k, ndof))."""
        if self.domain is None:
            return np.sqrt(np.sum(states * states, axis=-1))
        return self.domain.norm(states)


def _locate(grid: TimeGrid, t: np.ndarray) -> np.ndarray:
    # index i with t in ((i-1) tau, i tau]; t = 0 maps to 0
    i = np.ceil(t / grid.tau - 1e-12).astype(int)
    return np.clip(i, 0, grid.n)


def interpolate(traj: Trajectory, t, mode: str = "affine") -> np.ndarray:
    """Backward-constant or piecewise-affine interpolant of a trajectory.

    Accepts a scalar time (returns one state) or an array of times (returns one
    row per time).
    """
    grid = traj.grid
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    slack = 1e-12 * grid.T
    if np.any(t < -slack) or np.any(t > grid.T + slack):
        raise DomainError(f"interpolation time outside [0, {grid.T}]")
    t = np.clip(t, 0.0, grid.T)
    i = _locate(grid, t)
    u = traj.states
    if mode == "backward-constant":
        out = u[i]
    elif mode == "affine":
        im1 = np.maximum(i - 1, 0)
        alpha = np.where(i > 0, (t - im1 * grid.tau) / grid.tau, 1.0)[:, None]
        out = alpha * u[i] + (1.0 - alpha) * u[im1]
    else:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    return out[0] if scalar else out


def backward_mean(f: Callable, tau: float, t: float, quad_points: int = 5) -> np.ndarray:
    """(1/tau) * integral of f over [t - tau, t], by composite Simpson.

    `f` must accept an array of times and return one row per time. Exact for
    quadratics when quad_points >= 3; quad_points = 2 is the trapezoid rule.
    """
    if t <= tau:
        raise DomainError(f"backward mean needs t > tau (t={t}, tau={tau})")
    if quad_points < 2:
        raise ValueError("quad_points must be >= 2")
    s = np.linspace(t - tau, t, quad_points)
    vals = np.asarray(f(s), dtype=float)
    return simpson(vals, x=s, axis=0) / tau


@dataclass(frozen=True)
class TimeSamples:
    """A function of time known on sample times, evaluated by cubic interpolation.

    Calling the object with an array of times returns an array of shape
    (len(t), ndof).
    """

    t: np.ndarray
    values: np.ndarray
    domain: Any = None
    velocity: np.ndarray | None = None
    _spline: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != t.shape[0]:
            raise DimensionError("sample times and values disagree in length")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(t, values, axis=0))

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> TimeSamples:
        return cls(traj.grid.times, traj.states, traj.domain)

    def __call__(self, t) -> np.ndarray:
        return self._spline(np.asarray(t, dtype=float))

    def derivative(self, order: int = 1) -> Callable:
        return self._spline.derivative(order)
