"""Command-line entry point: gen-data, run, fit, validate, plot."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .experiment import (ExperimentConfig, ResultsTable, fit_and_report, load_config,
                         run_experiment, write_run_outputs)
from .fock import TASK_EPS0, ReservoirParams, annihilation, two_mode_embed
from .lindblad import IntegratorConfig, evolve, fock_population
from .reservoir import run_reservoir
from .tasks import make_split, save_split


# ---- physics validation suite ---- #

def physics_validation(time_step: float = 0.25) -> dict:
    """Reference-trajectory checks: decay law, hopping oscillation, trace, positivity.

    Returns the worst-case deviations; thresholds are applied by the caller.
    """
    cfg = IntegratorConfig()
    max_damp = 0.0
    max_hop = 0.0
    max_trace = 0.0
    min_eig = 1.0

    def track(rho):
        nonlocal max_trace, min_eig
        max_trace = max(max_trace, abs(np.trace(rho).real - 1.0))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))

    # single decaying mode from |1>: <n>(t) = e^{-kappa t}
    kappa = 0.5
    a = annihilation(5)
    h0 = np.zeros((6, 6), dtype=complex)
    rho = np.zeros((6, 6), dtype=complex)
    rho[1, 1] = 1.0
    t = 0.0
    while t < 4.0 - 1e-12:
        rho = evolve(rho, h0, [np.sqrt(kappa) * a], time_step, cfg)
        t += time_step
        pop = float(np.real(np.diag(rho) @ np.arange(6)))
        max_damp = max(max_damp, abs(pop - np.exp(-kappa * t)))
        track(rho)

    # lossless hopping between resonant modes from |1,0>: P10(t) = cos^2(g t)
    g = 0.4
    n1 = two_mode_embed(a.conj().T @ a, 1, 5)
    n2 = two_mode_embed(a.conj().T @ a, 2, 5)
    a1 = two_mode_embed(a, 1, 5)
    a2 = two_mode_embed(a, 2, 5)
    h_hop = 10.0 * (n1 + n2) + g * (a1.conj().T @ a2 + a1 @ a2.conj().T)
    rho = np.zeros((36, 36), dtype=complex)
    rho[6, 6] = 1.0  # flat index of |1,0>
    t = 0.0
    while t < 5.0 - 1e-12:
        rho = evolve(rho, h_hop, [], time_step, cfg)
        t += time_step
        p10 = fock_population(rho, 1, 0, 5)
        max_hop = max(max_hop, abs(p10 - np.cos(g * t) ** 2))
        track(rho)

    # driven dissipative trajectories at each task's drive scale
    for task, eps0 in TASK_EPS0.items():
        params = ReservoirParams(eps0=eps0)
        drive = np.array([1.0, -0.5, 2.0, -1.5, 0.8])
        from .fock import build_hamiltonian, collapse_operators, vacuum_density_matrix
        collapse = collapse_operators(params)
        rho = vacuum_density_matrix(5)
        for x in drive:
            rho = evolve(rho, build_hamiltonian(params, x), collapse, params.tau, cfg)
            track(rho)

    return {"max_damping_error": max_damp, "max_hopping_error": max_hop,
            "max_trace_deviation": max_trace, "min_eigenvalue": min_eig}


def validation_passed(report: dict) -> bool:
    return (report["max_damping_error"] <= 1e-6
            and report["max_hopping_error"] <= 1e-6
            and report["max_trace_deviation"] < 1e-9
            and report["min_eigenvalue"] >= -1e-8)


# ---- subcommand handlers ---- #

def _load_or_default_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = ExperimentConfig(**{**config.__dict__, "seed": args.seed})
    if args.out is not None:
        config = ExperimentConfig(**{**config.__dict__, "out_dir": args.out})
    return config


def _cmd_gen_data(args) -> int:
    config = _load_or_default_config(args)
    for t in config.t_grid:
        split = make_split(config.task, t, config.n_train, config.n_test,
                           config.seed + t)
        out = os.path.join(config.out_dir, f"T{t}")
        os.makedirs(out, exist_ok=True)
        save_split(out, split)
        print(f"wrote {config.task} split (T={t}) to {out}")
    return 0


def _cmd_run(args) -> int:
    config = _load_or_default_config(args)
    start = time.perf_counter()
    table = run_experiment(config, workers=args.workers)
    wall = time.perf_counter() - start
    csv_path = write_run_outputs(config.out_dir, config, table, wall)
    print(f"wrote {len(table.rows)} result rows to {csv_path} ({wall:.1f} s)")
    return 0


def _read_results_comment(path) -> str:
    with open(path) as fh:
        first = fh.readline().strip()
    return first[2:] if first.startswith("# ") else ""


def _cmd_fit(args) -> int:
    table = ResultsTable.from_csv(args.results)
    provenance = _read_results_comment(args.results)
    report, fits = fit_and_report(table)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.results))
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "fit_report.txt")
    with open(report_path, "w") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        fh.write(report)
    print(report, end="")
    if not args.csv_only:
        from .plots import render_all
        for path in render_all(out_dir, fits, description=provenance):
            print(f"wrote {path}")
    print(f"wrote {report_path}")
    return 0


def _cmd_plot(args) -> int:
    table = ResultsTable.from_csv(args.results)
    provenance = _read_results_comment(args.results)
    _report, fits = fit_and_report(table)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.results))
    from .plots import render_all
    for path in render_all(out_dir, fits, description=provenance):
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    report = physics_validation()
    print(f"max damping-law error: {report['max_damping_error']:.3e}")
    print(f"max hopping-law error: {report['max_hopping_error']:.3e}")
    print(f"max trace deviation: {report['max_trace_deviation']:.3e}")
    print(f"min eigenvalue: {report['min_eigenvalue']:.3e}")
    if validation_passed(report):
        print("validation passed")
        return 0
    print("validation FAILED", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bhqrc",
        description="Two-mode bosonic reservoir computing experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="experiment config (INI)")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--csv-only", action="store_true", help="skip plot emission")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data", parents=[common],
                   help="write train/test dataset files").set_defaults(func=_cmd_gen_data)
    sub.add_parser("run", parents=[common],
                   help="run the experiment grid").set_defaults(func=_cmd_run)
    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit scaling laws to a results file")
    p_fit.add_argument("results", help="results CSV from run")
    p_fit.set_defaults(func=_cmd_fit)
    p_plot = sub.add_parser("plot", parents=[common],
                            help="re-render plots from a results file")
    p_plot.add_argument("results", help="results CSV from run")
    p_plot.set_defaults(func=_cmd_plot)
    sub.add_parser("validate", parents=[common],
                   help="run the physics oracle suite").set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
