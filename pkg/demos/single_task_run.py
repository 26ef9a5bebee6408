#!/usr/bin/env python3
# Train the reservoir readout to tell Normal from Laplace samples and compare
# with the likelihood-ratio test on the same split. Sizes are the smallest
# that keep the 28-feature least-squares readout overdetermined; bump T and
# n_train for anything quantitative.
import time

import numpy as np

from bhqrc.baselines import glrt_classify
from bhqrc.fock import TASK_EPS0, ReservoirParams
from bhqrc.lindblad import IntegratorConfig
from bhqrc.readout import accuracy, classify, predict, train_readout
from bhqrc.reservoir import featurize_datasets
from bhqrc.tasks import classification_thresholds, make_split

T = 40
split = make_split("normal_vs_laplace", T, n_train=60, n_test=20, seed=8)

params = ReservoirParams(eps0=TASK_EPS0["normal_vs_laplace"])
cfg = IntegratorConfig()

t0 = time.time()
f_train = featurize_datasets(params, [d.sequence for d in split.train], cfg)
f_test = featurize_datasets(params, [d.sequence for d in split.test], cfg)
print(f"featurized {len(split.train) + len(split.test)} sequences "
      f"in {time.time() - t0:.1f}s")

weights = train_readout(f_train, split.train_labels())
scores = predict(f_test, weights)
pred = classify(scores, classification_thresholds("normal_vs_laplace"))

glrt = np.array([glrt_classify(d.sequence) for d in split.test])

print(f"reservoir accuracy at T={T}: {accuracy(pred, split.test_labels()):.2f}")
print(f"GLRT accuracy at T={T}:      {accuracy(glrt, split.test_labels()):.2f}")
print("\nper-sequence scores (label / readout score / GLRT call):")
for d, s, g in zip(split.test, scores, glrt):
    print(f"  {int(d.label)}  {s:+.3f}  {g}")
