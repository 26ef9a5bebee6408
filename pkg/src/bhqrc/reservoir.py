"""Input encoding, reservoir evolution and statistical pooling of neuron traces."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .fock import ReservoirParams, build_hamiltonian, collapse_operators, vacuum_density_matrix
from .lindblad import IntegratorConfig, evolve, fock_population

log = logging.getLogger(__name__)

# heavy-tailed inputs are clipped here to keep the drive inside the truncated space
CLIP_LIMIT = 20.0

_ENGINE_CACHE: dict = {}


def _fast_engine(params: ReservoirParams):
    """Compiled engine for the standard cutoff, or None when unavailable."""
    if params.n_cutoff != 5:
        return None
    engine = _ENGINE_CACHE.get(params)
    if engine is None:
        try:
            from ._kernel import FastEngine
        except ImportError:
            return None
        engine = _ENGINE_CACHE[params] = FastEngine(params)
    return engine


def _clip_inputs(sequence: np.ndarray) -> np.ndarray:
    n_over = int(np.sum(np.abs(sequence) > CLIP_LIMIT))
    if n_over:
        log.info("clipped %d of %d inputs to |x| <= %g", n_over, sequence.size, CLIP_LIMIT)
        return np.clip(sequence, -CLIP_LIMIT, CLIP_LIMIT)
    return sequence


def run_reservoir(params: ReservoirParams, sequence, cfg: IntegratorConfig = IntegratorConfig(),
                  engine: str = "auto", track_edge: bool = False):
    """Drive the vacuum-initialized reservoir with a sequence, one symbol per tau.

    Returns the (T, K) matrix of Fock populations p(i,j) for 0 <= i,j <= m_measure,
    measured after each symbol; K = (m_measure + 1)^2. State carries over between
    symbols. With track_edge=True also returns the per-symbol summed population
    of states at the cutoff boundary (truncation diagnostic).
    """
    sequence = np.asarray(sequence, dtype=float)
    if sequence.ndim != 1 or sequence.size < 1:
        raise ValueError("input sequence must be a non-empty 1-d vector")
    if not np.all(np.isfinite(sequence)):
        raise ValueError("input sequence contains non-finite values")
    sequence = _clip_inputs(sequence)

    if engine not in ("auto", "compiled", "dense"):
        raise ValueError(f"unknown engine {engine!r}")
    fast = _fast_engine(params) if engine in ("auto", "compiled") else None
    if engine == "compiled" and fast is None:
        raise RuntimeError("compiled engine requested but unavailable")

    if fast is not None:
        traj, edge = fast.run_sequence(sequence, cfg.rel_tol, cfg.abs_tol,
                                       cfg.max_step, cfg.hermitize_every)
        return (traj, edge) if track_edge else traj

    # dense reference path
    m = params.m_measure
    neurons = [(i, j) for i in range(m + 1) for j in range(m + 1)]
    edge_states = [(i, j) for i in range(params.n_cutoff + 1) for j in range(params.n_cutoff + 1)
                   if i == params.n_cutoff or j == params.n_cutoff]
    collapse = collapse_operators(params)
    rho = vacuum_density_matrix(params.n_cutoff)
    traj = np.empty((sequence.size, len(neurons)))
    edge = np.empty(sequence.size)
    for step, x in enumerate(sequence):
        h = build_hamiltonian(params, x)
        rho = evolve(rho, h, collapse, params.tau, cfg)
        traj[step] = [fock_population(rho, i, j, params.n_cutoff) for i, j in neurons]
        edge[step] = sum(fock_population(rho, i, j, params.n_cutoff) for i, j in edge_states)
    return (traj, edge) if track_edge else traj


# ---- pooling ---- #

def pool_features(traj: np.ndarray) -> np.ndarray:
    """Pool a neuron trajectory into per-neuron (mean, std, lag-1 autocorrelation) + bias.

    Std uses the population convention (divisor T). The autocorrelation uses the
    global trace mean: r1 = [sum_{t<T} d_t d_{t+1} / (T-1)] / [sum_t d_t^2 / T],
    set to 0 when the variance falls below 1e-14.
    """
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[0] < 2:
        raise ValueError("need a (T, K) trajectory with T >= 2")
    t_len = traj.shape[0]
    mean = traj.mean(axis=0)
    dev = traj - mean
    var = np.mean(dev ** 2, axis=0)
    std = np.sqrt(var)
    num = np.sum(dev[:-1] * dev[1:], axis=0) / (t_len - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ac1 = np.where(var < 1e-14, 0.0, num / np.where(var < 1e-14, 1.0, var))
    feats = np.empty(3 * traj.shape[1] + 1)
    feats[0:-1:3] = mean
    feats[1:-1:3] = std
    feats[2:-1:3] = ac1
    feats[-1] = 1.0
    return feats


def featurize_datasets(params: ReservoirParams, sequences, cfg: IntegratorConfig = IntegratorConfig(),
                       workers: int = 1, engine: str = "auto") -> np.ndarray:
    """Feature matrix with one pooled row per input sequence, order preserving."""
    sequences = list(sequences)
    if not sequences:
        raise ValueError("no sequences given")
    lengths = {len(s) for s in sequences}
    if len(lengths) != 1:
        raise ValueError(f"sequences must share one length, got {sorted(lengths)}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_featurize_one,
                                 ((params, np.asarray(s, float), cfg, engine) for s in sequences),
                                 chunksize=8))
    else:
        rows = [_featurize_one((params, s, cfg, engine)) for s in sequences]
    return np.vstack(rows)


def _featurize_one(job):
    params, sequence, cfg, engine = job
    return pool_features(run_reservoir(params, sequence, cfg, engine=engine))


# ---- persistence ---- #

def feature_header(m_measure: int) -> list[str]:
    names = []
    for i in range(m_measure + 1):
        for j in range(m_measure + 1):
            for stat in ("mean", "std", "ac1"):
                names.append(f"n{i}{j}_{stat}")
    names.append("bias")
    return names


def write_features(path, features: np.ndarray, m_measure: int = 2) -> None:
    header = feature_header(m_measure)
    if features.shape[1] != len(header):
        raise ValueError(f"feature width {features.shape[1]} does not match header {len(header)}")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in features:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_features(path) -> np.ndarray:
    with open(path) as fh:
        fh.readline()
        return np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])


def write_trajectory_dump(path, params: ReservoirParams, sequence,
                          cfg: IntegratorConfig = IntegratorConfig()) -> None:
    """Debug dump: per-symbol rows (t, p00, p01, ..., pmm)."""
    traj = run_reservoir(params, sequence, cfg)
    m = params.m_measure
    names = [f"p{i}{j}" for i in range(m + 1) for j in range(m + 1)]
    with open(path, "w") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for step, row in enumerate(traj):
            t = (step + 1) * params.tau
            fh.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
