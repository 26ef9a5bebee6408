"""Experiment orchestration: config parsing, the run loop, results tables, fit reports."""

from __future__ import annotations

import configparser
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import classical_garch_classify, glrt_classify, mle_student_inv_nu
from .fock import TASK_EPS0, ReservoirParams
from .lindblad import IntegratorConfig
from .readout import accuracy, classify, predict, rmse, train_readout
from .reservoir import featurize_datasets
from .scaling import (ACCURACY_LAWS, LAW_PARAMS, RMSE_LAWS, ScalingDatum, fit_report_row,
                      select_law)
from .tasks import TASK_NAMES, classification_thresholds, make_split

RESULTS_COLUMNS = "task,method,T,repetition,metric,value"

# error bars from few repetitions can collapse to zero on saturated curves;
# the fit stage needs sigma > 0, so a small floor is applied
SIGMA_FLOOR = 1e-4


@dataclass
class ExperimentConfig:
    task: str = "normal_vs_laplace"
    t_grid: tuple = (10, 40)
    n_train: int = 40
    n_test: int = 40
    n_repetitions: int = 3
    methods: tuple = ("qrc", "classical")
    seed: int = 1
    out_dir: str = "runs/smoke"
    reservoir_overrides: dict = field(default_factory=dict)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    garch_squared_feature: bool = True
    constrain_asymptote: bool = False

    def __post_init__(self):
        if self.task not in TASK_NAMES:
            raise ValueError(f"unknown task {self.task!r}")
        if not self.t_grid or any(t < 2 for t in self.t_grid):
            raise ValueError("t_grid must be non-empty with T >= 2")
        bad = set(self.methods) - {"qrc", "classical"}
        if bad or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of qrc/classical, got {self.methods}")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be >= 1")

    def reservoir_params(self) -> ReservoirParams:
        kwargs = dict(self.reservoir_overrides)
        kwargs.setdefault("eps0", TASK_EPS0[self.task])
        return ReservoirParams(**kwargs)

    def canonical_text(self) -> str:
        lines = [f"task={self.task}",
                 "t_grid=" + ",".join(str(t) for t in self.t_grid),
                 f"n_train={self.n_train}", f"n_test={self.n_test}",
                 f"n_repetitions={self.n_repetitions}",
                 "methods=" + ",".join(self.methods),
                 f"seed={self.seed}",
                 f"garch_squared_feature={self.garch_squared_feature}",
                 f"constrain_asymptote={self.constrain_asymptote}",
                 "integrator=" + ",".join(repr(v) for v in
                                          (self.integrator.rel_tol, self.integrator.abs_tol,
                                           self.integrator.max_step, self.integrator.hermitize_every))]
        for key in sorted(self.reservoir_overrides):
            lines.append(f"reservoir.{key}={self.reservoir_overrides[key]!r}")
        return "\n".join(lines)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


_INT_KEYS = {"n_train", "n_test", "n_repetitions", "seed"}
_BOOL_KEYS = {"garch_squared_feature", "constrain_asymptote"}


def load_config(path) -> ExperimentConfig:
    """Read a flat INI experiment definition (sections: experiment, reservoir, integrator)."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"cannot read config {path}")
    kwargs = {}
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    for key, raw in exp.items():
        if key == "t_grid":
            kwargs["t_grid"] = tuple(int(v) for v in raw.replace(",", " ").split())
        elif key == "methods":
            kwargs["methods"] = tuple(v.strip() for v in raw.split(",") if v.strip())
        elif key in _INT_KEYS:
            kwargs[key] = int(raw)
        elif key in _BOOL_KEYS:
            kwargs[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif key in ("task", "out_dir"):
            kwargs[key] = raw.strip()
        else:
            raise ValueError(f"unknown experiment key {key!r}")
    if parser.has_section("reservoir"):
        overrides = {}
        for key, raw in parser["reservoir"].items():
            overrides[key] = int(raw) if key in ("n_cutoff", "m_measure") else float(raw)
        kwargs["reservoir_overrides"] = overrides
    if parser.has_section("integrator"):
        icfg = {k: (int(v) if k == "hermitize_every" else float(v))
                for k, v in parser["integrator"].items()}
        kwargs["integrator"] = IntegratorConfig(**icfg)
    return ExperimentConfig(**kwargs)


def write_smoke_config(path) -> None:
    with open(path, "w") as fh:
        fh.write("[experiment]\n"
                 "task = normal_vs_laplace\n"
                 "t_grid = 10, 40\n"
                 "n_train = 40\n"
                 "n_test = 40\n"
                 "n_repetitions = 3\n"
                 "methods = qrc, classical\n"
                 "seed = 7\n")


# ---- results table ---- #

@dataclass
class ResultsTable:
    rows: list = field(default_factory=list)   # (task, method, T, repetition, metric, value)

    def append(self, task, method, t, rep, metric, value):
        self.rows.append((task, method, int(t), int(rep), metric, float(value)))

    def to_csv(self, path, header_comment: str = "") -> None:
        with open(path, "w") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write(RESULTS_COLUMNS + "\n")
            for task, method, t, rep, metric, value in self.rows:
                fh.write(f"{task},{method},{t},{rep},{metric},{repr(value)}\n")

    @classmethod
    def from_csv(cls, path) -> "ResultsTable":
        table = cls()
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line == RESULTS_COLUMNS:
                    continue
                task, method, t, rep, metric, value = line.split(",")
                table.append(task, method, int(t), int(rep), metric, float(value))
        return table

    def aggregate(self) -> dict:
        """Mean and spread across repetitions: {(task, method, metric): [(T, mean, std), ...]}."""
        groups: dict = {}
        for task, method, t, _rep, metric, value in self.rows:
            groups.setdefault((task, method, metric), {}).setdefault(t, []).append(value)
        out = {}
        for key, per_t in groups.items():
            curve = []
            for t in sorted(per_t):
                vals = np.array(per_t[t])
                std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                curve.append((t, float(vals.mean()), std))
            out[key] = curve
        return out


# ---- run loop ---- #

def _split_seed(master_seed: int, t: int, rep: int) -> int:
    return int(np.random.SeedSequence((master_seed, t, rep)).generate_state(1)[0])


def _evaluate_classical(split, config: ExperimentConfig):
    if split.task == "normal_vs_laplace":
        pred = np.array([glrt_classify(d.sequence) for d in split.test])
        return "accuracy", accuracy(pred, split.test_labels())
    if split.task == "student_t":
        est = np.array([mle_student_inv_nu(d.sequence).estimate for d in split.test])
        return "rmse", rmse(est, split.test_labels())
    return "accuracy", classical_garch_classify(split, include_squared=config.garch_squared_feature)


def _evaluate_qrc(split, config: ExperimentConfig, workers: int):
    params = config.reservoir_params()
    f_train = featurize_datasets(params, [d.sequence for d in split.train],
                                 config.integrator, workers=workers)
    f_test = featurize_datasets(params, [d.sequence for d in split.test],
                                config.integrator, workers=workers)
    weights = train_readout(f_train, split.train_labels())
    scores = predict(f_test, weights)
    thresholds = classification_thresholds(split.task)
    if thresholds is None:
        return "rmse", rmse(scores, split.test_labels())
    return "accuracy", accuracy(classify(scores, thresholds), split.test_labels())


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ResultsTable:
    """Run every (T, repetition, method) cell of the experiment grid.

    Fully deterministic for a fixed config: each repetition derives its split
    seed from (master seed, T, repetition) alone.
    """
    table = ResultsTable()
    for t in config.t_grid:
        for rep in range(config.n_repetitions):
            split = make_split(config.task, t, config.n_train, config.n_test,
                               _split_seed(config.seed, t, rep))
            for method in config.methods:
                try:
                    if method == "classical":
                        metric, value = _evaluate_classical(split, config)
                    else:
                        metric, value = _evaluate_qrc(split, config, workers)
                except Exception as exc:
                    raise RuntimeError(
                        f"{method} failed at T={t}, repetition={rep}: {exc}") from exc
                table.append(config.task, method, t, rep, metric, value)
    return table


def write_run_outputs(out_dir, config: ExperimentConfig, table: ResultsTable,
                      wall_time: float) -> str:
    """Persist results.csv plus the metadata sidecar; returns the CSV path."""
    from . import __version__
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    table.to_csv(csv_path, header_comment=f"config={config.config_hash()} seed={config.seed}")
    meta = {
        "config_hash": config.config_hash(),
        "config": config.canonical_text().split("\n"),
        "master_seed": config.seed,
        "code_version": __version__,
        "wall_time_s": wall_time,
        "created_unix": time.time(),
        "n_rows": len(table.rows),
    }
    with open(os.path.join(out_dir, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
    return csv_path


# ---- fitting and reporting ---- #

REPORT_HEADER = "task | law | A_inf/r_inf | c | k | p | chi2_red"


def curve_data(curve) -> list:
    """(T, mean, std) triples -> ScalingDatum list with the sigma floor applied."""
    return [ScalingDatum(t, mean, max(std, SIGMA_FLOOR)) for t, mean, std in curve]


def fit_and_report(results: ResultsTable, candidates: dict | None = None,
                   constrain_asymptote: bool = False):
    """Select a scaling law per (task, method) curve and format a report table.

    candidates optionally maps metric name -> law list; defaults are the
    accuracy laws for accuracy curves and the RMSE laws for RMSE curves.
    Returns (report text, {(task, method, metric): (fit, data)}).
    """
    aggregated = results.aggregate()
    if not aggregated:
        raise ValueError("empty results table")
    fits = {}
    lines = [REPORT_HEADER]
    for key in sorted(aggregated):
        task, method, metric = key
        laws = list((candidates or {}).get(
            metric, ACCURACY_LAWS if metric == "accuracy" else RMSE_LAWS))
        needed = max(len(LAW_PARAMS[law]) for law in laws) + 1
        n_distinct = len(aggregated[key])
        if n_distinct < needed:
            raise ValueError(f"insufficient T points for {key}: "
                             f"{n_distinct} < {needed} (max candidate params + 1)")
        data = curve_data(aggregated[key])
        fit = select_law(data, laws, constrain_asymptote=constrain_asymptote)
        fits[key] = (fit, data)
        lines.append(fit_report_row(f"{task}/{method}", fit))
    return "\n".join(lines) + "\n", fits
