"""Linear readout trained by least squares on pooled reservoir features."""

from __future__ import annotations

import numpy as np


def train_readout(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Least-squares weights (minimum-norm when underdetermined) via pseudoinverse."""
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    if targets.shape != (features.shape[0],):
        raise ValueError(f"targets shape {targets.shape} does not match {features.shape[0]} rows")
    if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
        raise ValueError("non-finite entries in training data")
    return np.linalg.pinv(features, rcond=1e-10) @ targets


def predict(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if features.shape[1] != weights.shape[0]:
        raise ValueError(f"feature width {features.shape[1]} does not match weights {weights.shape[0]}")
    return features @ weights


def classify(scores: np.ndarray, thresholds) -> np.ndarray:
    """Map continuous scores to class labels by counting thresholds strictly below."""
    scores = np.asarray(scores, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.size < 1:
        raise ValueError("at least one threshold required")
    if thresholds.size > 1 and np.any(np.diff(thresholds) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    return np.sum(scores[..., None] > thresholds, axis=-1)


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape or predicted.size == 0:
        raise ValueError("predictions and labels must be non-empty and congruent")
    return float(np.mean(predicted == labels))


def rmse(predicted: np.ndarray, targets: np.ndarray) -> float:
    predicted = np.asarray(predicted, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predicted.shape != targets.shape or predicted.size == 0:
        raise ValueError("predictions and targets must be non-empty and congruent")
    return float(np.sqrt(np.mean((predicted - targets) ** 2)))


def write_weights(path, weights: np.ndarray, names=None) -> None:
    weights = np.asarray(weights, dtype=float)
    if names is None:
        names = [f"w{i}" for i in range(weights.size)]
    if len(names) != weights.size:
        raise ValueError("one name per weight required")
    with open(path, "w") as fh:
        fh.write("feature,weight\n")
        for name, w in zip(names, weights):
            fh.write(f"{name},{repr(float(w))}\n")


def read_weights(path) -> np.ndarray:
    with open(path) as fh:
        fh.readline()
        return np.array([float(line.split(",")[1]) for line in fh if line.strip()])
