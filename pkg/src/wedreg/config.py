"""Experiment configuration: an INI-style document with a fixed schema, plus named presets.

Schema (keys are case-sensitive; every key is optional unless noted):

    [problem]
    dimension = 0            # 0: scalar ODE, 1: interval (-L, L) with Dirichlet ends
    potential = power        # power | klein-gordon | quadratic | none
    p = 4                    # exponent for power and klein-gordon, > 2
    mass = 1                 # klein-gordon only: W(r) = mass^2 r^2 / 2 + |r|^p / 2
    u0 = constant 1          # zero | constant <c> | bump <radius> [<amplitude>] | <number>
    u1 = zero
    L = 8                    # dimension 1 only
    m = 127                  # dimension 1 only: interior nodes

    [time]
    T = 3                    # required
    n = 300                  # required, >= 4

    [sweep]
    eps = 0.4, 0.2, 0.1, 0.05    # required, strictly descending
    energy_checks = true         # enforce eps < 1/2

    [solver]
    tol_grad, max_newton, max_cg, beta, c, linear_solver, tol_step

    [reference]
    dt = 1e-4

    [output]
    directory = results
    precision = 12           # significant digits in CSV files
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .functional import WedProblem, make_problem
from .solvers import SolverOptions
from .spatial import (
    Nonlinearity,
    SpatialDomain,
    initial_datum,
    interval_domain,
    klein_gordon,
    no_potential,
    power,
    quadratic,
    scalar_domain,
)
from .temporal import MIN_STEPS, build_grid, build_weights

POTENTIALS = ("power", "klein-gordon", "quadratic", "none")

SCHEMA: dict[str, dict[str, type]] = {
    "problem": {"dimension": int, "potential": str, "p": float, "mass": float,
                "u0": str, "u1": str, "L": float, "m": int},
    "time": {"T": float, "n": int},
    "sweep": {"eps": list, "energy_checks": bool},
    "solver": {"tol_grad": float, "max_newton": int, "max_cg": int, "beta": float,
               "c": float, "linear_solver": str, "tol_step": float},
    "reference": {"dt": float},
    "output": {"directory": str, "precision": int},
}
REQUIRED = {("time", "T"), ("time", "n"), ("sweep", "eps")}

PRESETS = {
    "fig1": """\
# scalar oscillator u'' + 2 u^3 = 0 with u(0) = 1, u'(0) = 0
[problem]
dimension = 0
potential = power
p = 4
u0 = constant 1
u1 = zero

[time]
T = 3
n = 300

[sweep]
eps = 0.4, 0.2, 0.1, 0.05

[reference]
dt = 1e-4
""",
    "wave1d": """\
# quartic wave equation on (-8, 8) started from a bump at rest
[problem]
dimension = 1
potential = power
p = 4
u0 = bump 2
u1 = zero
L = 8
m = 127

[time]
T = 3
n = 150

[sweep]
eps = 0.4, 0.2, 0.1, 0.05

[reference]
dt = 1e-3
""",
    "klein-gordon": """\
# u_tt - u_xx + u + 2 u^3 = 0 on (-8, 8) started from a bump at rest
[problem]
dimension = 1
potential = klein-gordon
p = 4
mass = 1
u0 = bump 2
u1 = zero
L = 8
m = 127

[time]
T = 3
n = 150

[sweep]
eps = 0.4, 0.2, 0.1, 0.05

[reference]
dt = 1e-3
""",
}


class ConfigError(ConfigurationError):
    """All problems found in a configuration document, with line numbers where known."""

    def __init__(self, errors: list[tuple[int | None, str]]):
        self.errors = errors
        lines = [f"line {ln}: {msg}" if ln else msg for ln, msg in errors]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int = 0
    potential: str = "power"
    p: float = 4.0
    mass: float = 1.0
    u0: str = "constant 1"
    u1: str = "zero"
    L: float = 8.0
    m: int = 127
    T: float = 3.0
    n: int = 300
    eps: tuple[float, ...] = (0.4, 0.2, 0.1, 0.05)
    energy_checks: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)
    ref_dt: float = 1e-4
    directory: str = "results"
    precision: int = 12

    def domain(self) -> SpatialDomain:
        return scalar_domain() if self.dimension == 0 else interval_domain(self.L, self.m)

    def nonlinearity(self) -> Nonlinearity:
        if self.potential == "power":
            return power(self.p)
        if self.potential == "klein-gordon":
            return klein_gordon(self.p, self.mass)
        if self.potential == "quadratic":
            return quadratic()
        return no_potential()

    def problem(self, eps: float | None = None) -> WedProblem:
        dom = self.domain()
        return make_problem(dom, self.nonlinearity(), initial_datum(self.u0, dom),
                            initial_datum(self.u1, dom), self.T, self.n,
                            self.eps[0] if eps is None else eps)


def _line_index(text: str) -> dict:
    """(section, key) -> line number, plus (section, None) for headers."""
    index, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        head = re.fullmatch(r"\[([^\]]+)\]", line)
        if head:
            section = head.group(1).strip()
            index.setdefault((section, None), no)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        if section is not None:
            index.setdefault((section, key), no)
    return index


def _convert(kind: type, raw: str):
    raw = raw.strip()
    if kind is int:
        value = float(raw)
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if kind is float:
        value = float(raw)
        if math.isnan(value):
            raise ValueError("NaN is not allowed")
        return value
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected true or false, got {raw!r}")
    if kind is list:
        items = [s for s in re.split(r"[,\s]+", raw.strip("[]() ")) if s]
        return tuple(float(s) for s in items)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document; raises ConfigError listing every problem."""
    lines = _line_index(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([(getattr(exc, "lineno", None), str(exc).splitlines()[0])]) from exc

    errors: list[tuple[int | None, str]] = []
    values: dict[tuple[str, str], object] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            errors.append((lines.get((section, None)), f"unknown section [{section}]"))
            continue
        for key, raw in parser.items(section):
            where = lines.get((section, key))
            if key not in SCHEMA[section]:
                errors.append((where, f"unknown key {key!r} in [{section}]"))
                continue
            try:
                values[(section, key)] = _convert(SCHEMA[section][key], raw)
            except ValueError as exc:
                errors.append((where, f"[{section}] {key}: type mismatch: {exc}"))
    for section, key in sorted(REQUIRED):
        if (section, key) not in values and not any(
            ln and msg.startswith(f"[{section}] {key}:") for ln, msg in errors
        ):
            errors.append((lines.get((section, None)), f"missing required key {key!r} in [{section}]"))

    def get(section, key, default):
        return values.get((section, key), default)

    def bad(section, key, msg):
        errors.append((lines.get((section, key)) or lines.get((section, None)), msg))

    base = ExperimentConfig()
    dimension = get("problem", "dimension", base.dimension)
    potential = get("problem", "potential", base.potential)
    p = get("problem", "p", base.p)
    T = get("time", "T", base.T)
    n = get("time", "n", base.n)
    eps = get("sweep", "eps", base.eps)
    energy_checks = get("sweep", "energy_checks", base.energy_checks)
    L = get("problem", "L", base.L)
    m = get("problem", "m", base.m)
    ref_dt = get("reference", "dt", base.ref_dt)
    precision = get("output", "precision", base.precision)

    if dimension not in (0, 1):
        bad("problem", "dimension", f"dimension must be 0 or 1, got {dimension}")
    if potential not in POTENTIALS:
        bad("problem", "potential", f"unknown potential {potential!r}; use one of {', '.join(POTENTIALS)}")
    elif potential in ("power", "klein-gordon") and not p > 2:
        bad("problem", "p", f"p must exceed 2, got {p}")
    if dimension == 1:
        if not L > 0:
            bad("problem", "L", f"L must be positive, got {L}")
        if m < 1:
            bad("problem", "m", f"m must be >= 1, got {m}")
    if not (T > 0 and math.isfinite(T)):
        bad("time", "T", f"T must be positive, got {T}")
    if n < MIN_STEPS:
        bad("time", "n", f"n too small: need n >= {MIN_STEPS}, got {n}")
    if not eps:
        bad("sweep", "eps", "eps list is empty")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        bad("sweep", "eps", "eps values must be positive")
    if any(a <= b for a, b in zip(eps, eps[1:])):
        bad("sweep", "eps", "eps list must be strictly descending")
    if energy_checks and any(e >= 0.5 for e in eps):
        bad("sweep", "eps", "eps must be < 1/2 (set energy_checks = false to allow larger values)")
    if not ref_dt > 0:
        bad("reference", "dt", f"reference dt must be positive, got {ref_dt}")
    if not 1 <= precision <= 17:
        bad("output", "precision", f"precision must lie in 1..17 significant digits, got {precision}")

    solver_kw = {k: v for (s, k), v in values.items() if s == "solver"}
    try:
        solver = SolverOptions(**solver_kw)
    except ConfigurationError as exc:
        errors.append((lines.get(("solver", None)), f"[solver] {exc}"))
        solver = SolverOptions()

    if errors:
        raise ConfigError(errors)

    cfg = ExperimentConfig(
        dimension=dimension, potential=potential, p=p,
        mass=get("problem", "mass", base.mass),
        u0=str(get("problem", "u0", base.u0)), u1=str(get("problem", "u1", base.u1)),
        L=L, m=m, T=T, n=n, eps=tuple(eps), energy_checks=energy_checks, solver=solver,
        ref_dt=ref_dt, directory=get("output", "directory", base.directory), precision=precision,
    )
    # checks that need the assembled objects
    dom = cfg.domain()
    for key in ("u0", "u1"):
        try:
            initial_datum(getattr(cfg, key), dom)
        except (ConfigurationError, ValueError) as exc:
            bad("problem", key, f"{key}: {exc}")
    grid = build_grid(T, n)
    for e in eps:
        try:
            build_weights(grid, e)
        except ConfigurationError as exc:
            bad("sweep", "eps", str(exc))
    if dimension == 1 and ref_dt > 0.9 * dom.h:
        bad("reference", "dt", f"reference dt={ref_dt:g} violates the CFL bound 0.9 h = {0.9 * dom.h:g}")
    if errors:
        raise ConfigError(errors)
    return cfg


def load_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError([(None, f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")])
    return parse_config(PRESETS[name])


def eps_override(cfg: ExperimentConfig, eps: list[float]) -> ExperimentConfig:
    """Copy of cfg with a new eps list, re-validated the same way as a parsed document."""
    arr = tuple(float(e) for e in eps)
    problems = []
    if not arr or any(not e > 0 for e in arr):
        problems.append((None, "eps values must be positive"))
    if any(a <= b for a, b in zip(arr, arr[1:])):
        problems.append((None, "eps list must be strictly descending"))
    if cfg.energy_checks and any(e >= 0.5 for e in arr):
        problems.append((None, "eps must be < 1/2 (set energy_checks = false to allow larger values)"))
    if problems:
        raise ConfigError(problems)
    grid = build_grid(cfg.T, cfg.n)
    for e in arr:
        try:
            build_weights(grid, e)
        except ConfigurationError as exc:
            raise ConfigError([(None, str(exc))]) from exc
    return replace(cfg, eps=arr)


def format_number(x, precision: int) -> str:
    """Locale-independent significant-digit formatting used for every CSV field."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), f".{precision}g")
