"""Command line entry point: ``wedreg {minimize,sweep,reference,validate}``.

Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import functional
from .config import ConfigError, ExperimentConfig, eps_override, format_number, load_preset, parse_config
from .diagnostics import convergence_study, el_residual, energy_lhs, final_bc_residual
from .errors import ConfigurationError, SolverError
from .solvers import minimize, solve_limit
from .temporal import TimeSamples, Trajectory
from .validate import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3

MINIMIZE_COLUMNS = ("eps", "tau", "objective", "grad_norm", "newton_iters", "el_residual",
                    "bc_res_2", "bc_res_3", "energy_value", "status")
SWEEP_COLUMNS = ("eps", "tau", "dist_sup", "dist_l2", "energy_value", "u1_gap", "iterations", "status")
VALIDATION_COLUMNS = ("check", "value", "threshold", "verdict", "detail")


class OutputWriter:
    """Collects CSV documents and writes them in one pass; a failed pass leaves no files behind."""

    def __init__(self, directory: Path, precision: int):
        self.directory = Path(directory)
        self.precision = precision
        self.pending: list[tuple[str, str]] = []

    def _field(self, value) -> str:
        if isinstance(value, str):
            return value
        return format_number(value, self.precision)

    def add(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([self._field(v) for v in row])
        self.pending.append((name, buf.getvalue()))

    def commit(self) -> list[Path]:
        self.directory.mkdir(parents=True, exist_ok=True)
        written = []
        try:
            for name, text in self.pending:
                path = self.directory / name
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                written.append(path)
        except BaseException:
            for path in written:
                path.unlink(missing_ok=True)
            raise
        return written


def _state_header(cfg: ExperimentConfig, precision: int) -> list[str]:
    if cfg.dimension == 0:
        return ["t", "u"]
    return ["t"] + [format_number(x, precision) for x in cfg.domain().x]


def _trajectory_rows(t: np.ndarray, states: np.ndarray):
    for ti, row in zip(t, states):
        yield [ti, *row]


def _eps_tag(eps: float) -> str:
    return format(eps, "g")


def cmd_minimize(cfg: ExperimentConfig, out: Path) -> int:
    if len(cfg.eps) != 1:
        raise ConfigError([(None, "minimize needs a single eps; pass --eps or use a one-element list")])
    prob = cfg.problem(cfg.eps[0])
    res = minimize(prob, cfg.solver)
    traj = res.traj
    bc2, bc3 = final_bc_residual(traj)
    energy = energy_lhs(traj, prob.nl).value if prob.n >= 5 else float("nan")
    elres = el_residual(traj, prob) if prob.n >= 5 else float("nan")
    writer = OutputWriter(out, cfg.precision)
    writer.add(f"trajectory_eps{_eps_tag(prob.eps)}.csv", _state_header(cfg, cfg.precision),
               _trajectory_rows(traj.grid.times, traj.states))
    writer.add("minimize_summary.csv", MINIMIZE_COLUMNS,
               [[prob.eps, prob.tau, res.objective, res.grad_norm, res.newton_iters, elres,
                 bc2, bc3, energy, res.status]])
    writer.commit()
    print(f"eps={prob.eps:g} status={res.status} objective={res.objective:.6g} "
          f"grad_norm={res.grad_norm:.3g} el_residual={elres:.3g} -> {out}")
    return EXIT_OK


def _reference(cfg: ExperimentConfig) -> TimeSamples:
    prob = cfg.problem()
    return solve_limit(prob.domain, prob.nl, prob.u0, prob.u1, cfg.T, cfg.ref_dt)


def cmd_reference(cfg: ExperimentConfig, out: Path) -> int:
    ref = _reference(cfg)
    writer = OutputWriter(out, cfg.precision)
    writer.add("reference.csv", _state_header(cfg, cfg.precision), _trajectory_rows(ref.t, ref.values))
    writer.commit()
    print(f"reference: {len(ref.t)} samples, dt={ref.t[1] - ref.t[0]:.6g} -> {out}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    ref = _reference(cfg)
    records = convergence_study(cfg.problem(), cfg.eps, ref, cfg.solver, jobs=jobs,
                                energy_checks=cfg.energy_checks)
    writer = OutputWriter(out, cfg.precision)
    writer.add("reference.csv", _state_header(cfg, cfg.precision), _trajectory_rows(ref.t, ref.values))
    for rec in records:
        if rec.ok:
            traj: Trajectory = rec.traj
            writer.add(f"trajectory_eps{_eps_tag(rec.eps)}.csv", _state_header(cfg, cfg.precision),
                       _trajectory_rows(traj.grid.times, traj.states))
    writer.add("sweep_summary.csv", SWEEP_COLUMNS,
               [[r.eps, r.tau, r.dist_sup, r.dist_l2, r.energy_value, r.u1_gap, r.iterations, r.status]
                for r in records])
    writer.commit()
    for r in records:
        print(f"eps={r.eps:<8g} dist_sup={r.dist_sup:.6g} dist_l2={r.dist_l2:.6g} "
              f"energy={r.energy_value:.6g} status={r.status}")
    energies = [r.energy_value for r in records if r.ok]
    if energies:
        print(f"energy bound over sweep: max={max(energies):.6g} max/min={max(energies) / min(energies):.4g}")
    return EXIT_OK if any(r.ok for r in records) else EXIT_SOLVER


def cmd_validate(cfg: ExperimentConfig | None, out: Path, fault: str | None = None) -> int:
    prob = None
    if cfg is not None:
        prob = cfg.problem()
    opts = cfg.solver if cfg is not None else None
    if fault:
        with functional.inject_fault(fault):
            checks = run_checks(prob, opts)
    else:
        checks = run_checks(prob, opts)
    precision = cfg.precision if cfg is not None else 12
    writer = OutputWriter(out, precision)
    writer.add("validation.csv", VALIDATION_COLUMNS,
               [[c.name, c.value, c.threshold, "pass" if c.passed else "FAIL", c.detail] for c in checks])
    writer.commit()
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  {'value':>12}  {'threshold':>12}  verdict")
    for c in checks:
        print(f"{c.name:<{width}}  {c.value:>12.4g}  {c.threshold:>12.4g}  {'pass' if c.passed else 'FAIL'}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def _parse_eps(text: str) -> list[float]:
    try:
        return [float(s) for s in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wedreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("minimize", "minimize the discrete functional for one eps"),
                           ("sweep", "eps sweep against a reference solution of the limit equation"),
                           ("reference", "integrate the limit equation only"),
                           ("validate", "run the invariant suite")):
        p = sub.add_parser(name, help=helptext)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, metavar="PATH", help="configuration file")
        src.add_argument("--preset", metavar="NAME", help="named preset: fig1, wave1d, klein-gordon")
        p.add_argument("--out", type=Path, metavar="DIR", help="output directory (overrides [output] directory)")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, metavar="N",
                       help="worker processes for sweeps")
        p.add_argument("--eps", type=_parse_eps, metavar="LIST", help="override the eps list, e.g. 0.2 or 0.4,0.2")
        if name == "validate":
            p.add_argument("--inject-fault", choices=functional.KNOWN_FAULTS,
                           help="corrupt the gradient to check that validation catches it")
    return parser


def _load(args) -> ExperimentConfig | None:
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([(None, f"cannot read {args.config}: {exc.strerror}")]) from exc
        cfg = parse_config(text)
    elif args.preset is not None:
        cfg = load_preset(args.preset)
    elif args.command == "validate":
        return None
    else:
        cfg = load_preset("fig1")
    if args.eps is not None:
        cfg = eps_override(cfg, args.eps)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        out = args.out or Path(cfg.directory if cfg is not None else "results")
        if args.command == "minimize":
            return cmd_minimize(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, max(1, args.jobs))
        if args.command == "reference":
            return cmd_reference(cfg, out)
        return cmd_validate(cfg, out, args.inject_fault)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
