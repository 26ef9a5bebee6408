"""Bosonic operators and the driven two-mode Bose-Hubbard Hamiltonian on a truncated Fock space."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# ---- parameters ---- #

@dataclass(frozen=True)
class ReservoirParams:
    """Physical and algorithmic settings of the two-mode reservoir.

    Frequencies and rates are angular (hbar = 1): rad/ns for energies,
    1/ns for decay, ns for times.
    """

    omega1: float = 10.0       # mode 1 frequency
    omega2: float = 9.0        # mode 2 frequency, slight detuning
    g12: float = 0.4           # hopping coupling
    u: float = 0.6             # anharmonicity U
    kappa1: float = 0.5        # decay rate of mode 1
    kappa2: float = 0.5        # decay rate of mode 2
    eps0: float = 1.0          # drive scale multiplying each input value
    n_cutoff: int = 5          # bosonic truncation per mode
    m_measure: int = 2         # populations measured for 0 <= i,j <= m_measure
    tau: float = 1.0           # evolution time per input symbol

    def __post_init__(self):
        for name in ("omega1", "omega2", "g12", "u", "kappa1", "kappa2", "eps0", "tau"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be strictly positive, got {v}")
        if not (self.n_cutoff >= self.m_measure >= 0):
            raise ValueError(
                f"need n_cutoff >= m_measure >= 0, got {self.n_cutoff}, {self.m_measure}")

    @property
    def dim(self) -> int:
        return (self.n_cutoff + 1) ** 2

    def with_eps0(self, eps0: float) -> "ReservoirParams":
        return replace(self, eps0=eps0)


# drive scales used by the three inference tasks
TASK_EPS0 = {"normal_vs_laplace": 3.8, "student_t": 1.0, "garch_bands": 1.9}


# ---- single-mode operators ---- #

def annihilation(n_cutoff: int) -> np.ndarray:
    """Truncated annihilation operator, entry (k-1, k) = sqrt(k)."""
    if n_cutoff < 1:
        raise ValueError(f"n_cutoff must be >= 1, got {n_cutoff}")
    return np.diag(np.sqrt(np.arange(1, n_cutoff + 1)), k=1).astype(complex)


def two_mode_embed(op: np.ndarray, mode: int, n_cutoff: int) -> np.ndarray:
    """Embed a single-mode operator: op (x) I for mode 1, I (x) op for mode 2."""
    d = n_cutoff + 1
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match cutoff dimension {d}")
    eye = np.eye(d, dtype=complex)
    if mode == 1:
        return np.kron(op, eye)
    if mode == 2:
        return np.kron(eye, op)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def mode_operators(n_cutoff: int):
    """(a1, a2) embedded in the two-mode space."""
    a = annihilation(n_cutoff)
    return two_mode_embed(a, 1, n_cutoff), two_mode_embed(a, 2, n_cutoff)


def basis_index(i: int, j: int, n_cutoff: int) -> int:
    """Flat index of the Fock basis state |i, j>."""
    d = n_cutoff + 1
    if not (0 <= i <= n_cutoff and 0 <= j <= n_cutoff):
        raise ValueError(f"basis indices ({i}, {j}) outside cutoff {n_cutoff}")
    return i * d + j


def vacuum_density_matrix(n_cutoff: int) -> np.ndarray:
    dim = (n_cutoff + 1) ** 2
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


# ---- model operators ---- #

def build_hamiltonian(params: ReservoirParams, x: float) -> np.ndarray:
    """Driven Bose-Hubbard Hamiltonian for input value x.

    H = sum_i [omega_i n_i - (U/2) n_i (n_i + 1) + i eps0 x (a_i - a_i^dag)]
        + g12 (a1^dag a2 + a1 a2^dag)
    """
    if not np.isfinite(x):
        raise ValueError(f"drive input must be finite, got {x}")
    a1, a2 = mode_operators(params.n_cutoff)
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    eye = np.eye(params.dim)
    h = (params.omega1 * n1 + params.omega2 * n2
         - 0.5 * params.u * (n1 @ (n1 + eye) + n2 @ (n2 + eye))
         + params.g12 * (a1.conj().T @ a2 + a1 @ a2.conj().T))
    drive = 1j * params.eps0 * x * ((a1 - a1.conj().T) + (a2 - a2.conj().T))
    return h + drive


def collapse_operators(params: ReservoirParams) -> list[np.ndarray]:
    """Decay channels [sqrt(kappa1) a1, sqrt(kappa2) a2]."""
    a1, a2 = mode_operators(params.n_cutoff)
    return [np.sqrt(params.kappa1) * a1, np.sqrt(params.kappa2) * a2]
