"""
Reservoir physics walk-through
==============================

Drives the two-mode dissipative reservoir with a short input sequence and
prints what the Fock-state neurons do, after first checking the solver
against two closed-form references: exponential photon loss of a single
decaying mode and coherent population exchange between two lossless modes.
"""
import numpy as np

from bhqrc.cli import physics_validation
from bhqrc.fock import TASK_EPS0, ReservoirParams
from bhqrc.lindblad import IntegratorConfig
from bhqrc.reservoir import pool_features, run_reservoir

report = physics_validation()
print("solver against closed forms:")
for key, value in report.items():
    print(f"  {key}: {value:.3e}")

# now feed an actual input sequence and watch the neurons respond
params = ReservoirParams(eps0=TASK_EPS0["normal_vs_laplace"])
rng = np.random.default_rng(0)
sequence = rng.normal(1.5, 0.4, 25)

traj, edge = run_reservoir(params, sequence, IntegratorConfig(), track_edge=True)
print(f"\ntrajectory shape: {traj.shape}  (symbols x monitored Fock states)")
print(f"max summed population bordering the truncation edge: {edge.max():.4f}")

labels = [f"p{i}{j}" for i in range(3) for j in range(3)]
print("\nfinal-step neuron populations:")
for name, val in zip(labels, traj[-1]):
    print(f"  {name}: {val:.4f}")

feats = pool_features(traj)
print(f"\npooled feature vector ({feats.size} entries, last one is the bias):")
print(np.array2string(feats, precision=4, suppress_small=True))
