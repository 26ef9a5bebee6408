"""Quantum reservoir computing on a driven, dissipative two-mode Bose-Hubbard system."""

__version__ = "0.1.0"

from .fock import ReservoirParams, annihilation, build_hamiltonian, collapse_operators, two_mode_embed
from .lindblad import IntegratorConfig, evolve, fock_population, lindblad_rhs
from .reservoir import featurize_datasets, pool_features, run_reservoir
from .readout import accuracy, classify, predict, rmse, train_readout
from .tasks import make_split, sample_laplace, sample_normal, sample_student_t, simulate_garch
from .baselines import classical_garch_classify, glrt_classify, mle_student_inv_nu
from .scaling import evaluate_law, linearized_scan_fit, select_law, wls_fit

__all__ = [
    "ReservoirParams", "annihilation", "build_hamiltonian", "collapse_operators", "two_mode_embed",
    "IntegratorConfig", "evolve", "fock_population", "lindblad_rhs",
    "featurize_datasets", "pool_features", "run_reservoir",
    "accuracy", "classify", "predict", "rmse", "train_readout",
    "make_split", "sample_laplace", "sample_normal", "sample_student_t", "simulate_garch",
    "classical_garch_classify", "glrt_classify", "mle_student_inv_nu",
    "evaluate_law", "linearized_scan_fit", "select_law", "wls_fit",
]
