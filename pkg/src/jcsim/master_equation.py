"""Lindblad generator, exact steady state, and time evolution.

Density matrices are stored dense; the Liouvillian acting on their
column-stacked (Fortran-order) vectorisation is kept sparse. With that
stacking, A rho B vectorises to kron(B.T, A) @ vec(rho), which fixes
every kron ordering below.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import SolverSingular, StepRejected, TruncationInsufficient, ParameterError
from .operators import TruncatedSpace, annihilation, atom_operators, hamiltonian
from .params import SystemParams

TRACE_TOL = 1e-9
HERM_TOL = 1e-9
EIG_FLOOR = -1e-7
TAIL_TOL = 1e-6
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    space: TruncatedSpace
    matrix: np.ndarray

    def validate(self, tail_tol=TAIL_TOL):
        """Check the physicality contract; raise instead of repairing.

        Trace within 1e-9 of one, hermitian to 1e-9, lowest eigenvalue
        above -1e-7, and the top two photon levels carrying less than
        tail_tol of the population. The tail bound is the truncation
        certificate: a state leaning on the cutoff is not trustworthy
        no matter how clean the other three checks look.
        """
        d = self.space.dim
        if self.matrix.shape != (d, d):
            raise ParameterError(f"matrix is {self.matrix.shape}, expected ({d}, {d})")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ParameterError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        herm = np.abs(self.matrix - self.matrix.conj().T).max()
        if herm > HERM_TOL:
            raise ParameterError(f"hermiticity violation {herm:.3e}")
        lowest = np.linalg.eigvalsh(self.matrix)[0]
        if lowest < EIG_FLOOR:
            raise ParameterError(f"negative eigenvalue {lowest:.3e}")
        tail = self.tail_weight()
        if tail >= tail_tol:
            raise TruncationInsufficient(
                f"top two photon levels hold {tail:.3e} >= {tail_tol:.1e} "
                f"of the population at n_max={self.space.n_max}")
        return self

    def photon_populations(self):
        """Photon-number distribution, atom traced out."""
        n_ph = self.space.n_max + 1
        diag = np.real(np.diagonal(self.matrix))
        return diag.reshape(2, n_ph).sum(axis=0)

    def tail_weight(self):
        pops = self.photon_populations()
        return float(pops[-2:].sum())


def vacuum_density(space: TruncatedSpace) -> DensityMatrix:
    """Atom in the ground state, cavity empty."""
    m = np.zeros((space.dim, space.dim), dtype=complex)
    m[0, 0] = 1.0
    return DensityMatrix(space, m)


def _dissipator(c: sp.csr_matrix) -> sp.csr_matrix:
    # 2 C rho C^dag - C^dag C rho - rho C^dag C, vectorised
    cdc = (c.conj().T @ c).tocsr()
    ident = sp.identity(c.shape[0], format="csr")
    return (2.0 * sp.kron(c.conj(), c)
            - sp.kron(ident, cdc)
            - sp.kron(cdc.T, ident)).tocsr()


def build_liouvillian(params: SystemParams) -> tuple[sp.csr_matrix, TruncatedSpace]:
    """Generator of the dissipative dynamics on vectorised density matrices.

    d rho / dt = -i[H, rho] + kappa D[a] rho + (gamma/2) D[sigma_minus] rho

    with D[C] rho = 2 C rho C^dag - C^dag C rho - rho C^dag C. Note the
    rate convention: kappa multiplies the half-strength dissipator, so
    field amplitudes decay at kappa and energy at 2 kappa.
    """
    space = TruncatedSpace(params.n_max)
    h = hamiltonian(params, space).entries
    ident = sp.identity(space.dim, format="csr")
    lv = -1j * (sp.kron(ident, h) - sp.kron(h.T, ident))
    lv = lv + params.kappa * _dissipator(annihilation(space).entries)
    if params.gamma > 0:
        sm = atom_operators(space)["sigma_minus"].entries
        lv = lv + 0.5 * params.gamma * _dissipator(sm)
    return lv.tocsr(), space


def steady_state(params: SystemParams, tail_tol=TAIL_TOL) -> DensityMatrix:
    """Exact steady state by direct sparse solve.

    The singular system L x = 0 is closed by replacing the first row
    with the trace functional and solving L' x = e_0. The result is
    hermitised and renormalised (both are roundoff-level touch-ups),
    then checked against the untouched L: |L vec(rho)| / |vec(rho)|
    must come out below 1e-8.

    tail_tol loosens only the truncation certificate, never the
    residual; see DensityMatrix.validate for why it exists.
    """
    lv, space = build_liouvillian(params)
    d = space.dim
    coo = lv.tocoo()
    keep = coo.row != 0
    trace_cols = np.arange(0, d * d, d + 1)
    rows = np.concatenate([coo.row[keep], np.zeros(d, dtype=coo.row.dtype)])
    cols = np.concatenate([coo.col[keep], trace_cols.astype(coo.col.dtype)])
    data = np.concatenate([coo.data[keep], np.ones(d, dtype=coo.data.dtype)])
    closed = sp.coo_matrix((data, (rows, cols)), shape=lv.shape).tocsc()

    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(closed, rhs)
        except spla.MatrixRankWarning as exc:
            raise SolverSingular(f"factorisation failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverSingular("solver returned non-finite entries")

    rho = x.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    vec = rho.reshape(d * d, order="F")
    rel = np.linalg.norm(lv @ vec) / np.linalg.norm(vec)
    if rel >= RESIDUAL_TOL:
        raise SolverSingular(f"steady-state residual {rel:.3e} >= {RESIDUAL_TOL:.1e}")
    return DensityMatrix(space, rho).validate(tail_tol=tail_tol)


def evolve(params: SystemParams, rho0: DensityMatrix, times,
           tail_tol=TAIL_TOL) -> list[DensityMatrix]:
    """Integrate the master equation through the given sample times.

    Local error tolerance 1e-8. The trace functional annihilates the
    generator exactly, so trace is conserved to roundoff by every
    Runge-Kutta stage; no renormalisation is applied.
    """
    lv, space = build_liouvillian(params)
    if rho0.space.n_max != space.n_max:
        raise ParameterError("initial state lives on a different cutoff")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise ParameterError("times must be strictly increasing")
    y0 = rho0.matrix.reshape(space.dim ** 2, order="F")
    sol = solve_ivp(lambda _t, v: lv @ v, (times[0], times[-1]), y0,
                    t_eval=times, method="DOP853", rtol=1e-8, atol=1e-11)
    if not sol.success:
        raise StepRejected(f"integrator stopped: {sol.message}")
    out = []
    for k in range(sol.y.shape[1]):
        rho = sol.y[:, k].reshape((space.dim, space.dim), order="F")
        rho = 0.5 * (rho + rho.conj().T)
        out.append(DensityMatrix(space, rho).validate(tail_tol=tail_tol))
    return out
