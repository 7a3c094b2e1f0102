"""Sparse operators on the truncated two-level-atom + cavity-mode space.

Tensor-product layout: atom index is the slow one, photon index the fast
one, so a joint basis state is |atom> (x) |n> and the flat index is
atom * (n_max + 1) + n. Atom basis: index 0 is the ground state, index 1
the excited state.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, ParameterError
from .params import SystemParams

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class TruncatedSpace:
    """Joint Hilbert space kept up to a photon-number cutoff."""

    n_max: int
    dim: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ParameterError(f"n_max must be an integer >= 1, got {self.n_max}")
        object.__setattr__(self, "dim", 2 * (self.n_max + 1))


@dataclass(frozen=True)
class OperatorMatrix:
    """A sparse matrix tagged with its space and a hermiticity promise.

    When hermitian_hint is set the constructor verifies the promise
    instead of trusting the caller; a silently non-hermitian Hamiltonian
    is the kind of bug that survives every downstream check.
    """

    space: TruncatedSpace
    entries: sp.csr_matrix
    hermitian_hint: bool = False

    def __post_init__(self):
        d = self.space.dim
        if self.entries.shape != (d, d):
            raise DimensionMismatch(
                f"entries are {self.entries.shape}, space needs ({d}, {d})")
        if self.hermitian_hint:
            diff = self.entries - self.entries.conj().T
            dev = np.abs(diff.data).max() if diff.nnz else 0.0
            if dev >= _HERM_TOL:
                raise ParameterError(
                    f"hermitian_hint set but max |E - E^dag| = {dev:.3e}")

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.entries.conj().T.tocsr(),
                              self.hermitian_hint)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        require_same_space(self, other)
        return OperatorMatrix(self.space, (self.entries @ other.entries).tocsr())


def require_same_space(*ops):
    cutoffs = {op.space.n_max for op in ops}
    if len(cutoffs) > 1:
        raise DimensionMismatch(f"mixed photon cutoffs: {sorted(cutoffs)}")


def _photon_annihilation(n_max):
    # <n-1| a |n> = sqrt(n)
    return sp.diags(np.sqrt(np.arange(1, n_max + 1)), offsets=1, format="csr")


def annihilation(space: TruncatedSpace) -> OperatorMatrix:
    """Photon annihilation operator on the joint space."""
    ident_atom = sp.identity(2, format="csr")
    a = sp.kron(ident_atom, _photon_annihilation(space.n_max), format="csr")
    return OperatorMatrix(space, a)


def atom_operators(space: TruncatedSpace) -> dict[str, OperatorMatrix]:
    """Pauli set on the joint space: sigma_minus/plus/z/x/y.

    sigma_minus takes the excited state to the ground state.
    """
    ident_ph = sp.identity(space.n_max + 1, format="csr")
    sm = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    sz = sp.csr_matrix(np.diag([-1.0, 1.0]))
    sx = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    sy = sp.csr_matrix(np.array([[0.0, -1.0j], [1.0j, 0.0]]))

    def lift(m, herm):
        return OperatorMatrix(space, sp.kron(m, ident_ph, format="csr"), herm)

    ops = {
        "sigma_minus": lift(sm, False),
        "sigma_z": lift(sz, True),
        "sigma_x": lift(sx, True),
        "sigma_y": lift(sy, True),
    }
    ops["sigma_plus"] = ops["sigma_minus"].dag()
    return ops


def hamiltonian(params: SystemParams, space: TruncatedSpace) -> OperatorMatrix:
    """Driven oscillator Hamiltonian in the frame rotating at the drive.

    H = -delta_omega (sigma_+ sigma_- + a^dag a)
        + i g (a^dag sigma_- - a sigma_+)
        + i eps_d (a^dag - a)
    """
    a = annihilation(space).entries
    ad = a.conj().T
    at = atom_operators(space)
    sm = at["sigma_minus"].entries
    spl = at["sigma_plus"].entries
    n_exc = (spl @ sm + ad @ a).tocsr()
    h = (-params.delta_omega * n_exc
         + 1j * params.g * (ad @ sm - a @ spl)
         + 1j * params.eps_d * (ad - a))
    return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)
