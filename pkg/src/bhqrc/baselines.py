"""Classical reference methods: GLRT classifier, tail-index MLE, raw-feature classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .readout import accuracy, classify, predict, train_readout
from .reservoir import pool_features
from .tasks import TaskSplit, classification_thresholds

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class MleResult:
    estimate: float
    log_likelihood: float
    converged: bool


# ---- Normal vs Laplace generalized likelihood ratio test ---- #

def glrt_classify(x) -> int:
    """0 for Normal, 1 for Laplace, by comparing plugged-in max log-likelihoods.

    Normal uses (mean, population variance); Laplace uses (median, mean absolute
    deviation from the median). Ties below 1e-12 go to Normal.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-d sequence of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries")
    n = x.size
    mu_n = x.mean()
    var_n = np.mean((x - mu_n) ** 2)
    mu_l = np.median(x)
    b_l = np.mean(np.abs(x - mu_l))
    if var_n <= 0.0 or b_l <= 0.0:
        raise ValueError("constant sequence: degenerate scale estimate")
    ll_normal = -0.5 * n * math.log(2.0 * math.pi * var_n) - 0.5 * np.sum((x - mu_n) ** 2) / var_n
    ll_laplace = -n * math.log(2.0 * b_l) - np.sum(np.abs(x - mu_l)) / b_l
    if ll_normal - ll_laplace > -1e-12:
        return 0
    return 1


# ---- Student-t tail-index maximum likelihood ---- #

def student_t_loglik(x: np.ndarray, nu: float) -> float:
    """Log-likelihood of standardized Student-t (location 0, scale 1)."""
    n = x.size
    return float(n * (gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0)
                      - 0.5 * math.log(nu * math.pi))
                 - 0.5 * (nu + 1.0) * np.sum(np.log1p(x * x / nu)))


def mle_student_inv_nu(x) -> MleResult:
    """Golden-section MLE of the inverse tail index 1/nu over nu in [1, 1000].

    The search runs on ln(nu), where the profile likelihood is smooth and
    effectively unimodal, to absolute tolerance 1e-4.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-d sequence of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries")

    def objective(u: float) -> float:
        val = student_t_loglik(x, math.exp(u))
        if not math.isfinite(val):
            raise ValueError("non-finite log-likelihood")
        return val

    lo, hi = 0.0, math.log(1000.0)
    c = hi - _GOLD * (hi - lo)
    d = lo + _GOLD * (hi - lo)
    fc, fd = objective(c), objective(d)
    while hi - lo > 1e-4:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLD * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLD * (hi - lo)
            fd = objective(d)
    nu_hat = math.exp(0.5 * (lo + hi))
    inv_nu = min(1.0, max(0.001, 1.0 / nu_hat))
    return MleResult(inv_nu, student_t_loglik(x, nu_hat), True)


# ---- raw-data feature classifier for the volatility task ---- #

def _raw_feature_row(x: np.ndarray, include_squared: bool) -> np.ndarray:
    stats = pool_features(x[:, None])[:3]
    if include_squared:
        sq_ac1 = pool_features((x * x)[:, None])[2]
        return np.concatenate([stats, [sq_ac1, 1.0]])
    return np.concatenate([stats, [1.0]])


def classical_garch_classify(split: TaskSplit, include_squared: bool = True) -> float:
    """Accuracy of the pseudoinverse classifier on raw-sequence pooled statistics.

    include_squared adds the lag-1 autocorrelation of the squared sequence (the
    minimal volatility-clustering feature); disable for strict feature parity
    with the reservoir pooling set.
    """
    thresholds = classification_thresholds(split.task)
    if thresholds is None:
        raise ValueError(f"{split.task} is not a classification task")
    f_train = np.array([_raw_feature_row(d.sequence, include_squared) for d in split.train])
    f_test = np.array([_raw_feature_row(d.sequence, include_squared) for d in split.test])
    w = train_readout(f_train, split.train_labels())
    pred = classify(predict(f_test, w), thresholds)
    return accuracy(pred, split.test_labels())
