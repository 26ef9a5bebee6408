"""Lindblad master equation integration with an embedded Runge-Kutta 4(5) stepper.

The reference implementation here works on dense complex matrices of any
dimension. The reservoir loop uses a structure-aware compiled kernel with the
same stepping logic (see _kernel.py); tests pin the two against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Dormand-Prince 4(5) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between 5th and embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_MIN_STEP_FRACTION = 1e-14


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = np.inf
    hermitize_every: int = 1

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2), got {v}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if self.hermitize_every < 1:
            raise ValueError("hermitize_every must be a positive step count")


def lindblad_rhs(h: np.ndarray, collapse: list[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """d(rho)/dt = -i[H, rho] + sum_j (C rho C^dag - 1/2 {C^dag C, rho})."""
    if h.shape != rho.shape or any(c.shape != rho.shape for c in collapse):
        raise ValueError("operator and state dimensions disagree")
    out = -1j * (h @ rho - rho @ h)
    for c in collapse:
        cdc = c.conj().T @ c
        out += c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def evolve(rho0: np.ndarray, h: np.ndarray, collapse: list[np.ndarray], tau: float,
           cfg: IntegratorConfig = IntegratorConfig(), h_init: float | None = None,
           ) -> np.ndarray:
    """Propagate rho0 for a duration tau under a constant Hamiltonian.

    Adaptive embedded RK4(5); the state is re-hermitized after accepted steps.
    Trace is deliberately not renormalized, so trace drift stays visible as a
    diagnostic. Raises RuntimeError on step-size underflow.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    # drift K folds the anticommutator part: rhs = K rho + rho K^dag + sum C rho C^dag
    k_drift = -1j * h.astype(complex)
    for c in collapse:
        k_drift -= 0.5 * (c.conj().T @ c)

    def rhs(rho):
        out = k_drift @ rho + rho @ k_drift.conj().T
        for c in collapse:
            out += c @ rho @ c.conj().T
        return out

    rho = _hermitize(np.asarray(rho0, dtype=complex))
    t = 0.0
    step_size = min(tau, cfg.max_step, 1e-2 if h_init is None else h_init)
    k = [None] * 7
    k[0] = rhs(rho)
    accepted = 0
    while t < tau:
        remaining = tau - t
        h_try = min(remaining, step_size, cfg.max_step)
        last = h_try >= remaining
        if h_try < _MIN_STEP_FRACTION * tau:
            raise RuntimeError(f"step size underflow at t={t:.3e} (h={h_try:.3e})")
        for s in range(1, 7):
            y = rho + h_try * sum(a * ki for a, ki in zip(_A[s], k[:s]))
            k[s] = rhs(y)
        y5 = y  # stage 7 node is the 5th-order solution
        err_vec = h_try * sum(e * ki for e, ki in zip(_E, k))
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(rho), np.abs(y5))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        if err <= 1.0:
            t = tau if last else t + h_try
            accepted += 1
            rho = _hermitize(y5) if accepted % cfg.hermitize_every == 0 else y5
            if t < tau:
                k[0] = rhs(rho)
        factor = 10.0 if err < 1e-12 else min(10.0, max(0.2, 0.9 * err ** -0.2))
        step_size = h_try * factor
    trace_dev = abs(np.trace(rho).real - 1.0)
    if trace_dev >= 1e-9:
        raise RuntimeError(f"trace invariant violated: |tr(rho) - 1| = {trace_dev:.3e}")
    return rho


def fock_population(rho: np.ndarray, i: int, j: int, n_cutoff: int = 5) -> float:
    """Occupation probability of basis state |i, j>, clamped to [0, 1]."""
    d = n_cutoff + 1
    if not (0 <= i <= n_cutoff and 0 <= j <= n_cutoff):
        raise ValueError(f"indices ({i}, {j}) out of range for cutoff {n_cutoff}")
    entry = rho[i * d + j, i * d + j]
    if abs(entry.imag) >= 1e-10:
        raise ValueError(f"diagonal entry ({i},{j}) has imaginary part {entry.imag:.3e}")
    return float(min(1.0, max(0.0, entry.real)))
