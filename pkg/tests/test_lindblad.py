import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from bhqrc.fock import (ReservoirParams, annihilation, build_hamiltonian,
                        collapse_operators, vacuum_density_matrix)
from bhqrc.lindblad import IntegratorConfig, evolve, fock_population, lindblad_rhs

KAPPA = 0.5


def single_mode_system():
    a = annihilation(5)
    h = 10.0 * (a.conj().T @ a)
    c = np.sqrt(KAPPA) * a
    rho = np.zeros((6, 6), dtype=complex)
    rho[1, 1] = 1.0
    return h, [c], rho


def random_density_matrix(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


# ---- right-hand side ---- #

def test_rhs_zero_hamiltonian_no_collapse():
    rho = random_density_matrix(6, 1)
    out = lindblad_rhs(np.zeros((6, 6), dtype=complex), [], rho)
    assert np.max(np.abs(out)) == 0.0


def test_rhs_vacuum_is_dark_state():
    p = ReservoirParams()
    h = build_hamiltonian(p, 0.0)
    out = lindblad_rhs(h, collapse_operators(p), vacuum_density_matrix(5))
    assert np.max(np.abs(out)) < 1e-14


def test_rhs_single_mode_decay_rate():
    # d<n>/dt = -kappa <n> for amplitude damping; here <n> = 1
    h, collapse, rho = single_mode_system()
    out = lindblad_rhs(h, collapse, rho)
    n = np.diag(np.arange(6.0))
    assert np.trace(n @ out).real == pytest.approx(-KAPPA, abs=1e-12)


def test_rhs_dimension_mismatch():
    h, collapse, rho = single_mode_system()
    with pytest.raises(ValueError):
        lindblad_rhs(h[:5, :5], collapse, rho)
    with pytest.raises(ValueError):
        lindblad_rhs(h, [c[:5, :5] for c in collapse], rho)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_rhs_traceless_property(seed):
    p = ReservoirParams(eps0=3.8)
    rng = np.random.default_rng(seed)
    h = build_hamiltonian(p, float(rng.normal()))
    rho = random_density_matrix(36, seed + 1)
    out = lindblad_rhs(h, collapse_operators(p), rho)
    assert abs(np.trace(out)) < 1e-12


# ---- configuration ---- #

def test_integrator_config_validation():
    IntegratorConfig(rel_tol=1e-6, abs_tol=1e-9)
    for bad in ({"rel_tol": 0.0}, {"rel_tol": 0.5}, {"abs_tol": -1e-9}, {"max_step": 0.0}):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)
    with pytest.raises(ValueError):
        IntegratorConfig(hermitize_every=0)


# ---- evolve: closed-form references ---- #

def test_amplitude_damping_closed_form():
    h, collapse, rho = single_mode_system()
    cfg = IntegratorConfig()
    for t in (0.5, 1.0, 2.0):
        out = evolve(rho, h, collapse, t, cfg)
        assert out[1, 1].real == pytest.approx(np.exp(-KAPPA * t), abs=1e-6)


def test_lossless_hopping_closed_form():
    # resonant modes, no anharmonicity, one excitation: P10 = cos^2(g t)
    g = 0.4
    a = annihilation(5)
    eye = np.eye(6)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    h = 10.0 * (n1 + n2) + g * (a1.conj().T @ a2 + a1 @ a2.conj().T)
    rho = np.zeros((36, 36), dtype=complex)
    rho[6, 6] = 1.0
    cfg = IntegratorConfig()
    for t in (0.7, 2.0, 3.9):
        out = evolve(rho, h, [], t, cfg)
        assert fock_population(out, 1, 0, 5) == pytest.approx(np.cos(g * t) ** 2, abs=1e-6)
        assert fock_population(out, 0, 1, 5) == pytest.approx(np.sin(g * t) ** 2, abs=1e-6)


def test_evolve_tiny_tau_is_identity():
    p = ReservoirParams(eps0=3.8)
    h = build_hamiltonian(p, 1.0)
    rho = random_density_matrix(36, 7)
    out = evolve(rho, h, collapse_operators(p), 1e-9, IntegratorConfig())
    assert np.max(np.abs(out - rho)) < 1e-8


def test_evolve_deterministic():
    p = ReservoirParams(eps0=1.9)
    h = build_hamiltonian(p, -0.8)
    rho = vacuum_density_matrix(5)
    cfg = IntegratorConfig()
    out1 = evolve(rho, h, collapse_operators(p), 1.0, cfg)
    out2 = evolve(rho, h, collapse_operators(p), 1.0, cfg)
    assert np.array_equal(out1, out2)


def test_evolve_step_underflow():
    h, collapse, rho = single_mode_system()
    with pytest.raises(RuntimeError, match="underflow"):
        evolve(rho, h, collapse, 1.0, IntegratorConfig(max_step=1e-16))


def test_evolve_rejects_bad_tau():
    h, collapse, rho = single_mode_system()
    with pytest.raises(ValueError):
        evolve(rho, h, collapse, 0.0, IntegratorConfig())


# ---- evolve: invariants ---- #

def driven_trajectory(eps0, xs, cfg=IntegratorConfig()):
    p = ReservoirParams(eps0=eps0)
    collapse = collapse_operators(p)
    rho = vacuum_density_matrix(5)
    states = []
    for x in xs:
        rho = evolve(rho, build_hamiltonian(p, x), collapse, p.tau, cfg)
        states.append(rho)
    return states


def test_trace_hermiticity_positivity_along_trajectory():
    states = driven_trajectory(3.8, [1.2, -0.4, 2.0, -1.8, 0.9])
    for rho in states:
        assert abs(np.trace(rho).real - 1.0) < 1e-9
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(rho)[0] >= -1e-8


def test_contraction_toward_vacuum_without_drive():
    # decay-only dynamics: vacuum population never decreases, from any start
    p = ReservoirParams()
    h = build_hamiltonian(p, 0.0)
    collapse = collapse_operators(p)
    cfg = IntegratorConfig()
    rho = random_density_matrix(36, 11)
    rho = 0.5 * (rho + rho.conj().T)
    prev = fock_population(rho, 0, 0, 5)
    for _ in range(12):
        rho = evolve(rho, h, collapse, 0.25, cfg)
        cur = fock_population(rho, 0, 0, 5)
        assert cur >= prev - 1e-8
        prev = cur


def test_tolerance_halving_convergence():
    xs = [0.9, -1.1, 1.7]
    coarse = driven_trajectory(3.8, xs)
    fine = driven_trajectory(3.8, xs, IntegratorConfig(rel_tol=5e-9, abs_tol=5e-11))
    for rc, rf in zip(coarse, fine):
        for i in range(3):
            for j in range(3):
                delta = abs(fock_population(rc, i, j, 5) - fock_population(rf, i, j, 5))
                assert delta < 1e-7


def test_hermitize_every_setting():
    p = ReservoirParams(eps0=1.0)
    h = build_hamiltonian(p, 0.6)
    rho = vacuum_density_matrix(5)
    base = evolve(rho, h, collapse_operators(p), 1.0, IntegratorConfig())
    sparse = evolve(rho, h, collapse_operators(p), 1.0, IntegratorConfig(hermitize_every=5))
    assert np.max(np.abs(base - sparse)) < 1e-9


def test_evolve_matches_matrix_exponential():
    # independent propagator: rho(t) = unvec(expm(t L) vec(rho0)) on a smaller space
    cutoff = 3
    p = ReservoirParams(eps0=1.0, n_cutoff=cutoff)
    x = 0.7
    h = build_hamiltonian(p, x)
    collapse = collapse_operators(p)
    dim = p.dim
    eye = np.eye(dim)
    liouville = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in collapse:
        cc = c.conj().T @ c
        liouville += (np.kron(c, c.conj())
                      - 0.5 * np.kron(cc, eye)
                      - 0.5 * np.kron(eye, cc.T))
    rho0 = vacuum_density_matrix(cutoff)
    expected = (expm(1.0 * liouville) @ rho0.reshape(-1)).reshape(dim, dim)
    out = evolve(rho0, h, collapse, 1.0, IntegratorConfig())
    assert np.max(np.abs(out - expected)) < 1e-8


# ---- fock_population ---- #

def test_fock_population_examples():
    vac = vacuum_density_matrix(5)
    assert fock_population(vac, 0, 0, 5) == 1.0
    assert fock_population(vac, 1, 0, 5) == 0.0
    mixed = np.eye(36, dtype=complex) / 36.0
    assert fock_population(mixed, 2, 2, 5) == pytest.approx(1 / 36, abs=1e-15)


def test_fock_population_clamps():
    rho = vacuum_density_matrix(5)
    rho[0, 0] = 1.0 + 5e-11
    assert fock_population(rho, 0, 0, 5) == 1.0
    rho[0, 0] = -5e-11
    assert fock_population(rho, 0, 0, 5) == 0.0


def test_fock_population_errors():
    vac = vacuum_density_matrix(5)
    with pytest.raises(ValueError):
        fock_population(vac, 6, 0, 5)
    bad = vacuum_density_matrix(5).astype(complex)
    bad[0, 0] = 1.0 + 1e-6j
    with pytest.raises(ValueError):
        fock_population(bad, 0, 0, 5)
