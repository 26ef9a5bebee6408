"""Dataset generators for the three inference tasks and train/test split assembly.

Training parameters sweep uniform grids over the published ranges (random within
band for the volatility task); test parameters are drawn uniformly at random.
Every dataset gets its own counter-based random stream, so train and test are
disjoint and reproducible independently of each other's sizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TASK_NAMES = ("normal_vs_laplace", "student_t", "garch_bands")

MU_RANGE = (1.0, 2.0)
SCALE_RANGE = (0.1, 0.7)          # sigma for Normal, b for Laplace
INV_NU_RANGE = (1.0 / 30.0, 1.0)
GARCH_BANDS = ((0.2, 0.6), (0.6, 0.9), (0.9, 0.99))
GARCH_MIN_ALPHA = 0.01
GARCH_OMEGA = 1.0
GARCH_BURN_IN = 200

_TRAIN_STREAM, _TEST_STREAM = 0, 1


@dataclass
class LabeledDataset:
    sequence: np.ndarray
    label: float
    meta: dict = field(default_factory=dict)


@dataclass
class TaskSplit:
    task: str
    train: list
    test: list
    seed: int

    def train_matrix(self) -> np.ndarray:
        return np.vstack([d.sequence for d in self.train])

    def test_matrix(self) -> np.ndarray:
        return np.vstack([d.sequence for d in self.test])

    def train_labels(self) -> np.ndarray:
        return np.array([d.label for d in self.train], dtype=float)

    def test_labels(self) -> np.ndarray:
        return np.array([d.label for d in self.test], dtype=float)


# ---- elementary samplers ---- #

def sample_normal(mu: float, sigma: float, t_len: int, rng) -> np.ndarray:
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if t_len < 1:
        raise ValueError("length must be >= 1")
    return mu + sigma * rng.standard_normal(t_len)


def sample_laplace(mu: float, b: float, t_len: int, rng) -> np.ndarray:
    """Laplace(mu, b) draws via the inverse CDF x = mu - b*sgn(u)*ln(1-2|u|)."""
    if b <= 0:
        raise ValueError(f"b must be positive, got {b}")
    if t_len < 1:
        raise ValueError("length must be >= 1")
    u = rng.random(t_len) - 0.5
    bad = np.abs(u) >= 0.5
    while np.any(bad):   # u = -1/2 has measure zero but would hit log(0)
        u[bad] = rng.random(int(bad.sum())) - 0.5
        bad = np.abs(u) >= 0.5
    return mu - b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def sample_student_t(nu: float, t_len: int, rng) -> np.ndarray:
    """Standardized Student-t draws, z / sqrt(v/nu) with v ~ chi^2(nu)."""
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if t_len < 1:
        raise ValueError("length must be >= 1")
    z = rng.standard_normal(t_len)
    v = rng.chisquare(nu, t_len)
    return z / np.sqrt(v / nu)


def simulate_garch(omega_g: float, alpha: float, beta: float, t_len: int, rng) -> np.ndarray:
    """GARCH(1,1) path x_t = sigma_t z_t after a 200-step burn-in.

    sigma_t^2 = omega_g + alpha*x_{t-1}^2 + beta*sigma_{t-1}^2, started at the
    unconditional variance omega_g / (1 - alpha - beta).
    """
    if omega_g <= 0:
        raise ValueError(f"omega_g must be positive, got {omega_g}")
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be non-negative")
    if alpha + beta >= 1:
        raise ValueError(f"nonstationary parameters: alpha+beta = {alpha + beta} >= 1")
    if t_len < 1:
        raise ValueError("length must be >= 1")
    n_total = GARCH_BURN_IN + t_len
    z = rng.standard_normal(n_total)
    out = np.empty(n_total)
    var = omega_g / (1.0 - alpha - beta)
    for t in range(n_total):
        x = np.sqrt(var) * z[t]
        out[t] = x
        var = omega_g + alpha * x * x + beta * var
    return out[GARCH_BURN_IN:]


# ---- split assembly ---- #

def _stream(seed: int, role: int, index: int):
    return np.random.default_rng(np.random.SeedSequence((seed, role, index)))


def _location_scale_grid(per: int):
    """Per-class training parameters covering the (mu, scale) box.

    Near-square product grid n_mu * n_scale = per when the count factors with
    both axes >= 2; otherwise a joint sweep of both ranges (per points along
    the box diagonal), which keeps tiny counts pinned to the range endpoints.
    """
    factors = None
    for n_mu in range(2, int(per ** 0.5) + 1):
        if per % n_mu == 0:
            factors = (n_mu, per // n_mu)
    if factors is None:
        return np.linspace(*MU_RANGE, per), np.linspace(*SCALE_RANGE, per)
    mm, ss = np.meshgrid(np.linspace(*MU_RANGE, factors[0]),
                         np.linspace(*SCALE_RANGE, factors[1]), indexing="ij")
    return mm.ravel(), ss.ravel()


def _draw_garch_band(rng, lo: float, hi: float):
    # uniform over {alpha >= GARCH_MIN_ALPHA, beta >= 0, alpha+beta in band}
    while True:
        a = rng.uniform(GARCH_MIN_ALPHA, hi)
        b = rng.uniform(0.0, hi)
        if lo <= a + b <= hi:
            return a, b


def _garch_dataset(rng, band_index: int, t_len: int) -> LabeledDataset:
    lo, hi = GARCH_BANDS[band_index]
    alpha, beta = _draw_garch_band(rng, lo, hi)
    seq = simulate_garch(GARCH_OMEGA, alpha, beta, t_len, rng)
    meta = {"family": "garch", "omega_g": GARCH_OMEGA, "alpha": alpha, "beta": beta}
    return LabeledDataset(seq, float(band_index), meta)


def make_split(task: str, t_len: int, n_train: int, n_test: int, seed: int) -> TaskSplit:
    """Assemble a reproducible train/test split for one task.

    Counts for the classification tasks must divide evenly by the class count.
    """
    if task not in TASK_NAMES:
        raise ValueError(f"unknown task {task!r}")
    if n_train < 2 or n_test < 2:
        raise ValueError("n_train and n_test must both be >= 2")
    if t_len < 2:
        raise ValueError("sequence length must be >= 2")
    n_classes = {"normal_vs_laplace": 2, "student_t": 1, "garch_bands": 3}[task]
    if n_classes > 1 and (n_train % n_classes or n_test % n_classes):
        raise ValueError(f"{task} counts must be divisible by {n_classes}")

    train: list[LabeledDataset] = []
    test: list[LabeledDataset] = []

    if task == "normal_vs_laplace":
        per = n_train // 2
        mus, scales = _location_scale_grid(per)
        for i in range(per):
            rng = _stream(seed, _TRAIN_STREAM, i)
            seq = sample_normal(mus[i], scales[i], t_len, rng)
            train.append(LabeledDataset(seq, 0.0, {"family": "normal", "mu": mus[i], "sigma": scales[i]}))
        for i in range(per):
            rng = _stream(seed, _TRAIN_STREAM, per + i)
            seq = sample_laplace(mus[i], scales[i], t_len, rng)
            train.append(LabeledDataset(seq, 1.0, {"family": "laplace", "mu": mus[i], "b": scales[i]}))
        per_test = n_test // 2
        for j in range(n_test):
            rng = _stream(seed, _TEST_STREAM, j)
            mu = rng.uniform(*MU_RANGE)
            scale = rng.uniform(*SCALE_RANGE)
            if j < per_test:
                seq = sample_normal(mu, scale, t_len, rng)
                test.append(LabeledDataset(seq, 0.0, {"family": "normal", "mu": mu, "sigma": scale}))
            else:
                seq = sample_laplace(mu, scale, t_len, rng)
                test.append(LabeledDataset(seq, 1.0, {"family": "laplace", "mu": mu, "b": scale}))

    elif task == "student_t":
        inv_nus = np.linspace(*INV_NU_RANGE, n_train)
        for i, inv_nu in enumerate(inv_nus):
            rng = _stream(seed, _TRAIN_STREAM, i)
            seq = sample_student_t(1.0 / inv_nu, t_len, rng)
            train.append(LabeledDataset(seq, float(inv_nu), {"family": "student_t", "nu": 1.0 / inv_nu}))
        for j in range(n_test):
            rng = _stream(seed, _TEST_STREAM, j)
            inv_nu = rng.uniform(*INV_NU_RANGE)
            seq = sample_student_t(1.0 / inv_nu, t_len, rng)
            test.append(LabeledDataset(seq, float(inv_nu), {"family": "student_t", "nu": 1.0 / inv_nu}))

    else:  # garch_bands; parameters random within band for train and test alike
        per = n_train // 3
        for i in range(n_train):
            rng = _stream(seed, _TRAIN_STREAM, i)
            train.append(_garch_dataset(rng, i // per, t_len))
        per_test = n_test // 3
        for j in range(n_test):
            rng = _stream(seed, _TEST_STREAM, j)
            test.append(_garch_dataset(rng, j // per_test, t_len))

    return TaskSplit(task, train, test, seed)


def classification_thresholds(task: str):
    """Decision thresholds for the ordinal class encoding, or None for regression."""
    return {"normal_vs_laplace": (0.5,), "student_t": None, "garch_bands": (0.5, 1.5)}[task]


# ---- persistence ---- #

def write_datasets(path, datasets) -> None:
    if not datasets:
        raise ValueError("nothing to write")
    t_len = len(datasets[0].sequence)
    header = "dataset_id,label," + ",".join(f"x_{t + 1}" for t in range(t_len))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i, ds in enumerate(datasets):
            if len(ds.sequence) != t_len:
                raise ValueError("datasets in one file must share one length")
            vals = ",".join(repr(float(v)) for v in ds.sequence)
            fh.write(f"{i},{repr(float(ds.label))},{vals}\n")


def read_datasets(path) -> list:
    out = []
    with open(path) as fh:
        fh.readline()
        for line in fh:
            if not line.strip():
                continue
            parts = line.split(",")
            out.append(LabeledDataset(np.array([float(v) for v in parts[2:]]), float(parts[1])))
    return out


def save_split(out_dir, split: TaskSplit) -> None:
    """Write train/test CSVs plus a JSON sidecar with the generating parameters."""
    import os
    write_datasets(os.path.join(out_dir, f"{split.task}_train.csv"), split.train)
    write_datasets(os.path.join(out_dir, f"{split.task}_test.csv"), split.test)
    meta = {
        "task": split.task,
        "seed": split.seed,
        "t_len": int(len(split.train[0].sequence)),
        "n_train": len(split.train),
        "n_test": len(split.test),
        "train_meta": [{**d.meta, "label": d.label} for d in split.train],
        "test_meta": [{**d.meta, "label": d.label} for d in split.test],
    }
    with open(os.path.join(out_dir, f"{split.task}_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
