import numpy as np
import pytest

from bhqrc.fock import (TASK_EPS0, ReservoirParams, annihilation, basis_index,
                        build_hamiltonian, collapse_operators, mode_operators,
                        two_mode_embed, vacuum_density_matrix)


def test_annihilation_entries():
    a = annihilation(5)
    assert a.shape == (6, 6)
    for k in range(1, 6):
        assert a[k - 1, k] == pytest.approx(np.sqrt(k), abs=1e-15)
    # everything off the first superdiagonal is zero
    mask = np.ones_like(a, dtype=bool)
    mask[np.arange(5), np.arange(1, 6)] = False
    assert np.all(a[mask] == 0)


def test_annihilation_rejects_bad_cutoff():
    with pytest.raises(ValueError):
        annihilation(0)


def test_number_operator_diagonal():
    a = annihilation(5)
    n = a.conj().T @ a
    assert np.allclose(n, np.diag(np.arange(6.0)), atol=1e-14)


def test_truncated_commutator():
    # [a, a+] = I - (n_cutoff+1)|n_cutoff><n_cutoff| on the truncated space
    a = annihilation(5)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(6)
    expected[5, 5] = -5.0
    assert np.allclose(comm, expected, atol=1e-13)


def test_two_mode_embed_commute():
    a1, a2 = mode_operators(5)
    assert np.max(np.abs(a1 @ a2 - a2 @ a1)) < 1e-13
    assert a1.shape == (36, 36)


def test_two_mode_embed_rejects_bad_mode():
    a = annihilation(5)
    with pytest.raises(ValueError):
        two_mode_embed(a, 3, 5)


def test_basis_index_row_major():
    assert basis_index(0, 0, 5) == 0
    assert basis_index(1, 0, 5) == 6
    assert basis_index(0, 1, 5) == 1
    assert basis_index(5, 5, 5) == 35
    with pytest.raises(ValueError):
        basis_index(6, 0, 5)


def test_params_defaults_and_validation():
    p = ReservoirParams()
    assert (p.omega1, p.omega2, p.g12, p.u) == (10.0, 9.0, 0.4, 0.6)
    assert (p.kappa1, p.kappa2, p.tau) == (0.5, 0.5, 1.0)
    assert p.dim == 36
    with pytest.raises(ValueError):
        ReservoirParams(kappa1=0.0)
    with pytest.raises(ValueError):
        ReservoirParams(n_cutoff=1, m_measure=2)


def test_task_drive_scales():
    assert TASK_EPS0 == {"normal_vs_laplace": 3.8, "student_t": 1.0, "garch_bands": 1.9}


def test_hamiltonian_hermitian_any_drive():
    p = ReservoirParams(eps0=3.8)
    for x in (-2.5, 0.0, 0.3, 4.0):
        h = build_hamiltonian(p, x)
        assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_hamiltonian_conserves_number_without_drive():
    p = ReservoirParams()
    h = build_hamiltonian(p, 0.0)
    a1, a2 = mode_operators(5)
    n_tot = a1.conj().T @ a1 + a2.conj().T @ a2
    comm = h @ n_tot - n_tot @ h
    assert np.max(np.abs(comm)) < 1e-10 * np.max(np.abs(h))


def test_hamiltonian_diagonal_energies():
    # <i,j|H|i,j> = sum over modes of omega*n - (U/2)*n*(n+1) at x=0
    p = ReservoirParams()
    h = build_hamiltonian(p, 0.0)

    def site(omega, n):
        return omega * n - 0.5 * p.u * n * (n + 1)

    for i in (0, 1, 3, 5):
        for j in (0, 2, 5):
            expected = site(p.omega1, i) + site(p.omega2, j)
            assert h[basis_index(i, j, 5), basis_index(i, j, 5)].real == pytest.approx(expected, abs=1e-12)


def test_vacuum_ground_state_undriven():
    p = ReservoirParams()
    h = build_hamiltonian(p, 0.0)
    vals, vecs = np.linalg.eigh(h)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    assert np.abs(vecs[0, 0]) == pytest.approx(1.0, abs=1e-10)


def test_drive_term_structure():
    # H(x) - H(0) = i*eps0*x*(a1 - a1+ + a2 - a2+)
    p = ReservoirParams(eps0=1.9)
    x = -1.7
    a1, a2 = mode_operators(5)
    expected = 1j * p.eps0 * x * (a1 - a1.conj().T + a2 - a2.conj().T)
    diff = build_hamiltonian(p, x) - build_hamiltonian(p, 0.0)
    assert np.max(np.abs(diff - expected)) < 1e-12


def test_build_hamiltonian_rejects_nonfinite():
    with pytest.raises(ValueError):
        build_hamiltonian(ReservoirParams(), np.nan)


def test_collapse_operators():
    p = ReservoirParams()
    c1, c2 = collapse_operators(p)
    a1, a2 = mode_operators(5)
    assert np.max(np.abs(c1 - np.sqrt(0.5) * a1)) < 1e-12
    assert np.max(np.abs(c2 - np.sqrt(0.5) * a2)) < 1e-12
    vac = np.zeros(36)
    vac[0] = 1.0
    assert np.max(np.abs(c1 @ vac)) == 0.0
    assert np.max(np.abs(c2 @ vac)) == 0.0
    n1 = a1.conj().T @ a1
    assert np.max(np.abs(c1.conj().T @ c1 - p.kappa1 * n1)) < 1e-12


def test_vacuum_density_matrix():
    rho = vacuum_density_matrix(5)
    assert rho[0, 0] == 1.0
    assert np.trace(rho) == 1.0
    assert np.count_nonzero(rho) == 1
