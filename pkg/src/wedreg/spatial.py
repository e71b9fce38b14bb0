"""Spatial models: the scalar case and a Dirichlet interval with lumped P1 elements.

States are plain float arrays with ``domain.ndof`` entries in the last axis.
Leading axes are treated as a batch, so a whole trajectory (n + 1, ndof) can be
passed to the pointwise routines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class SpatialDomain:
    kind: str = "scalar"
    L: float = 0.0
    m: int = 1

    def __post_init__(self):
        if self.kind == "scalar":
            object.__setattr__(self, "m", 1)
        elif self.kind == "interval":
            if not self.L > 0:
                raise ConfigurationError(f"half-length L must be positive, got {self.L}")
            if int(self.m) != self.m or self.m < 1:
                raise ConfigurationError(f"interior node count m must be >= 1, got {self.m}")
        else:
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        return 0 if self.kind == "scalar" else 1

    @property
    def ndof(self) -> int:
        return self.m

    @property
    def h(self) -> float:
        """Mesh size; 1 in the scalar case so that lumped weights reduce to plain sums."""
        return 2.0 * self.L / (self.m + 1) if self.kind == "interval" else 1.0

    @property
    def x(self) -> np.ndarray:
        if self.kind == "scalar":
            return np.zeros(1)
        return -self.L + self.h * np.arange(1, self.m + 1)

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 0:
            u = u.reshape(1)
        if u.shape[-1] != self.ndof:
            raise DimensionError(f"state has {u.shape[-1]} dofs, domain has {self.ndof}")
        return u

    def inner(self, u, v) -> np.ndarray:
        return self.h * np.sum(np.asarray(u) * np.asarray(v), axis=-1)

    def norm(self, u) -> np.ndarray:
        return np.sqrt(self.inner(u, u))

    def edge_differences(self, u) -> np.ndarray:
        """(u_{j+1} - u_j) / h over all m + 1 edges, with the pinned zeros at +-L."""
        pad = [(0, 0)] * (u.ndim - 1) + [(1, 1)]
        return np.diff(np.pad(u, pad), axis=-1) / self.h

    def stiffness_apply(self, u) -> np.ndarray:
        """Riesz representative of v -> sum_edges h (delta_x u)(delta_x v): minus the discrete Laplacian."""
        if self.kind == "scalar":
            return np.zeros_like(u)
        g = self.edge_differences(u)
        return -np.diff(g, axis=-1) / self.h

    def stiffness_matrix(self) -> sp.csr_matrix:
        """Matrix of stiffness_apply."""
        if self.kind == "scalar":
            return sp.csr_matrix((1, 1))
        m, h2 = self.m, self.h**2
        return sp.diags(
            [-np.ones(m - 1) / h2, 2 * np.ones(m) / h2, -np.ones(m - 1) / h2], [-1, 0, 1], format="csr"
        )


def scalar_domain() -> SpatialDomain:
    return SpatialDomain("scalar")


def interval_domain(L: float, m: int) -> SpatialDomain:
    return SpatialDomain("interval", float(L), int(m))


@dataclass(frozen=True)
class Nonlinearity:
    """Convex potential W with W', W''.

    The built-in kinds are the polynomial family W(r) = (a/2) r^2 + (b/2) |r|^p
    ("power": a=0, b=1; "quadratic": a=1, b=0; "klein-gordon": a=mass^2, b=1;
    "none": W = 0). "custom" carries user callables.
    """

    kind: str
    p: float = 2.0
    quad_coef: float = 0.0
    power_coef: float = 0.0
    growth_constant: float | None = None
    W_fn: Callable | None = None
    dW_fn: Callable | None = None
    d2W_fn: Callable | None = None

    @property
    def is_even(self) -> bool:
        return self.kind != "custom"

    def W(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "custom":
            return np.asarray(self.W_fn(r), dtype=float)
        return 0.5 * self.quad_coef * r * r + 0.5 * self.power_coef * np.abs(r) ** self.p

    def dW(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "custom":
            return np.asarray(self.dW_fn(r), dtype=float)
        p = self.p
        return self.quad_coef * r + 0.5 * p * self.power_coef * np.abs(r) ** (p - 2) * r

    def d2W(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "custom":
            return np.asarray(self.d2W_fn(r), dtype=float)
        p = self.p
        # for 2 < p < 3 the limit value 0 at r = 0 is what 0.0 ** (p - 2) gives
        return self.quad_coef + 0.5 * p * (p - 1) * self.power_coef * np.abs(r) ** (p - 2)


def power(p: float) -> Nonlinearity:
    """W(r) = |r|^p / 2, so W'(r) = (p/2) |r|^(p-2) r."""
    if not p > 2:
        raise ConfigurationError(f"power exponent must exceed 2, got {p}")
    return Nonlinearity("power", float(p), 0.0, 1.0)


def quadratic() -> Nonlinearity:
    return Nonlinearity("quadratic", 2.0, 1.0, 0.0)


def klein_gordon(p: float = 4.0, mass: float = 1.0) -> Nonlinearity:
    if not p > 2:
        raise ConfigurationError(f"power exponent must exceed 2, got {p}")
    return Nonlinearity("klein-gordon", float(p), float(mass) ** 2, 1.0)


def no_potential() -> Nonlinearity:
    return Nonlinearity("none", 2.0, 0.0, 0.0)


def custom(W, dW, d2W, p: float, growth_constant: float, probe=None) -> Nonlinearity:
    """User potential, validated for convexity and p-growth on a probe grid:

        |r|^p / C <= W(r) + C,    |W'(r)|^(p/(p-1)) <= C (1 + |r|^p).
    """
    if not p >= 2:
        raise ConfigurationError(f"growth exponent must be >= 2, got {p}")
    C = float(growth_constant)
    if not C > 0:
        raise ConfigurationError("growth constant must be positive")
    r = np.linspace(-10.0, 10.0, 2001) if probe is None else np.asarray(probe, dtype=float)
    nl = Nonlinearity("custom", float(p), growth_constant=C, W_fn=W, dW_fn=dW, d2W_fn=d2W)
    problems = []
    if np.any(nl.d2W(r) < -1e-12):
        problems.append("W'' < 0 somewhere on the probe grid (W not convex)")
    ar = np.abs(r) ** p
    if np.any(ar / C > nl.W(r) + C):
        problems.append("coercivity |r|^p / C <= W(r) + C fails on the probe grid")
    if np.any(np.abs(nl.dW(r)) ** (p / (p - 1)) > C * (1 + ar)):
        problems.append("growth bound |W'|^(p') <= C (1 + |r|^p) fails on the probe grid")
    if problems:
        raise ConfigurationError("; ".join(problems))
    return nl


def phi(u, nl: Nonlinearity, domain: SpatialDomain):
    """Energy 1/2 int |grad u|^2 + int W(u), lumped on the mesh (batched over leading axes)."""
    u = domain.check(u)
    pot = domain.h * np.sum(nl.W(u), axis=-1)
    if domain.kind == "scalar":
        return pot
    g = domain.edge_differences(u)
    return 0.5 * domain.h * np.sum(g * g, axis=-1) + pot


def grad_phi(u, nl: Nonlinearity, domain: SpatialDomain) -> np.ndarray:
    """Riesz representative of D phi(u) in the lumped L2 product: -Laplacian u + W'(u)."""
    u = domain.check(u)
    return domain.stiffness_apply(u) + nl.dW(u)


def hess_phi_apply(u, v, nl: Nonlinearity, domain: SpatialDomain) -> np.ndarray:
    u = domain.check(u)
    v = domain.check(v)
    return domain.stiffness_apply(v) + nl.d2W(u) * v


def hess_phi_matrix(u, nl: Nonlinearity, domain: SpatialDomain) -> sp.csr_matrix:
    """Matrix of v -> hess_phi_apply(u, v, ...) for a single state u."""
    u = domain.check(u)
    return (domain.stiffness_matrix() + sp.diags(nl.d2W(u))).tocsr()


def bump(x, radius: float, amplitude: float = 1.0) -> np.ndarray:
    """amplitude * max(0, 1 - (x / radius)^2)^2, compactly supported in [-radius, radius]."""
    return amplitude * np.maximum(0.0, 1.0 - (np.asarray(x) / radius) ** 2) ** 2


def initial_datum(desc, domain: SpatialDomain) -> np.ndarray:
    """Build a state from a datum description.

    Accepted forms: a number, an array of length ndof, or a string
    "<number>", "zero", "constant <c>", "bump <radius> [<amplitude>]". Bumps need an interval.
    """
    if isinstance(desc, str):
        words = desc.split()
        if not words:
            raise ConfigurationError("empty initial datum description")
        name, args = words[0].lower(), words[1:]
        if len(words) == 1:
            try:
                return np.full(domain.ndof, float(words[0]))
            except ValueError:
                pass
        try:
            vals = [float(a) for a in args]
        except ValueError as exc:
            raise ConfigurationError(f"bad initial datum description {desc!r}") from exc
        if name == "zero" and not vals:
            return np.zeros(domain.ndof)
        if name == "constant" and len(vals) == 1:
            return np.full(domain.ndof, vals[0])
        if name == "bump" and len(vals) in (1, 2):
            if domain.kind != "interval":
                raise ConfigurationError("bump datum needs an interval domain")
            if vals[0] <= 0:
                raise ConfigurationError("bump radius must be positive")
            return bump(domain.x, *vals)
        raise ConfigurationError(f"bad initial datum description {desc!r}")
    arr = np.asarray(desc, dtype=float)
    if arr.ndim == 0:
        return np.full(domain.ndof, float(arr))
    return domain.check(arr).copy()
