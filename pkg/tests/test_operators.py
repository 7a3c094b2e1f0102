import numpy as np
import pytest

from jcsim.errors import DimensionMismatch, ParameterError
from jcsim.operators import (OperatorMatrix, TruncatedSpace, annihilation,
                             atom_operators, hamiltonian, require_same_space)
from jcsim.params import SystemParams


def test_space_dimension():
    assert TruncatedSpace(7).dim == 16


def test_space_rejects_bad_cutoff():
    with pytest.raises(ParameterError):
        TruncatedSpace(0)


def test_annihilation_matrix_elements():
    space = TruncatedSpace(4)
    a = annihilation(space).entries.toarray()
    n_ph = space.n_max + 1
    for atom in (0, 1):
        for n in range(1, n_ph):
            row = atom * n_ph + n - 1
            col = atom * n_ph + n
            assert a[row, col] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 2 * space.n_max


def test_commutator_identity_away_from_cutoff():
    # [a, a^dag] = 1 except in the top photon level, where truncation
    # leaves -n_max on the diagonal
    space = TruncatedSpace(6)
    a = annihilation(space)
    comm = (a @ a.dag()).entries - (a.dag() @ a).entries
    diag = comm.diagonal().real
    n_ph = space.n_max + 1
    for atom in (0, 1):
        block = diag[atom * n_ph:(atom + 1) * n_ph]
        assert np.allclose(block[:-1], 1.0)
        assert block[-1] == pytest.approx(-space.n_max)


def test_atom_algebra():
    space = TruncatedSpace(3)
    at = atom_operators(space)
    sm = at["sigma_minus"].entries
    sp_ = at["sigma_plus"].entries
    sz = at["sigma_z"].entries
    # sigma_+ sigma_- projects onto the excited state; together with
    # sigma_- sigma_+ it resolves the identity
    proj_e = (sp_ @ sm).toarray()
    proj_g = (sm @ sp_).toarray()
    assert np.allclose(proj_e + proj_g, np.eye(space.dim))
    assert np.allclose((proj_e - proj_g), sz.toarray())
    assert np.allclose(sm.toarray(), at["sigma_plus"].dag().entries.toarray())


def test_pauli_xy_from_ladder():
    space = TruncatedSpace(2)
    at = atom_operators(space)
    sx = (at["sigma_plus"].entries + at["sigma_minus"].entries).toarray()
    sy = (1j * (at["sigma_plus"].entries - at["sigma_minus"].entries)).toarray()
    assert np.allclose(sx, at["sigma_x"].entries.toarray())
    assert np.allclose(sy, at["sigma_y"].entries.toarray())


def test_sigma_minus_lowers_excited_to_ground():
    space = TruncatedSpace(2)
    sm = atom_operators(space)["sigma_minus"].entries
    n_ph = space.n_max + 1
    excited = np.zeros(space.dim)
    excited[n_ph + 1] = 1.0  # |e, n=1>
    out = sm @ excited
    assert out[1] == pytest.approx(1.0)  # |g, n=1>
    assert np.linalg.norm(out) == pytest.approx(1.0)


def test_hermitian_hint_is_verified():
    space = TruncatedSpace(2)
    with pytest.raises(ParameterError, match="hermitian_hint"):
        OperatorMatrix(space, annihilation(space).entries, hermitian_hint=True)


def test_shape_guard():
    space = TruncatedSpace(2)
    other = TruncatedSpace(3)
    with pytest.raises(DimensionMismatch):
        OperatorMatrix(other, annihilation(space).entries)


def test_require_same_space():
    a = annihilation(TruncatedSpace(2))
    b = annihilation(TruncatedSpace(3))
    with pytest.raises(DimensionMismatch):
        require_same_space(a, b)
    require_same_space(a, a.dag())


def _params(**kw):
    base = dict(g=5.0, kappa=1.0, gamma=0.0, delta_omega=5.0, eps_d=0.45, n_max=10)
    base.update(kw)
    return SystemParams(**base)


def test_hamiltonian_is_hermitian():
    space = TruncatedSpace(10)
    h = hamiltonian(_params(), space).entries
    dev = np.abs((h - h.conj().T).toarray()).max()
    assert dev < 1e-12


def test_hamiltonian_diagonal_when_uncoupled_and_undriven():
    space = TruncatedSpace(4)
    p = _params(g=0.0, eps_d=0.0, delta_omega=2.0)
    h = hamiltonian(p, space).entries.toarray()
    assert np.count_nonzero(h - np.diag(np.diagonal(h))) == 0
    n_ph = space.n_max + 1
    for atom in (0, 1):
        for n in range(n_ph):
            # diagonal entry is -delta_omega times the excitation count
            assert h[atom * n_ph + n, atom * n_ph + n] == pytest.approx(
                -2.0 * (n + atom))


def test_coupling_block_connects_excited_to_next_photon():
    # <g, n+1| H |e, n> = i g sqrt(n+1)
    space = TruncatedSpace(5)
    p = _params(g=3.0, eps_d=0.0, delta_omega=0.0)
    h = hamiltonian(p, space).entries.toarray()
    n_ph = space.n_max + 1
    for n in range(space.n_max):
        assert h[n + 1, n_ph + n] == pytest.approx(1j * 3.0 * np.sqrt(n + 1))


def test_drive_block():
    # <n+1| H |n> = i eps_d sqrt(n+1) within each atom sector
    space = TruncatedSpace(5)
    p = _params(g=0.0, eps_d=0.7, delta_omega=0.0)
    h = hamiltonian(p, space).entries.toarray()
    n_ph = space.n_max + 1
    for atom in (0, 1):
        for n in range(space.n_max):
            idx = atom * n_ph + n
            assert h[idx + 1, idx] == pytest.approx(1j * 0.7 * np.sqrt(n + 1))
