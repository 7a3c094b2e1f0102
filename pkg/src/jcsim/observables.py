"""Expectation values, reduced states, and phase-space distributions.

Coordinate conventions, fixed once here:
  - Husimi grids live in the coherent-amplitude plane: a coherent state
    beta peaks at (Re beta, Im beta) and Q(alpha) = <alpha|rho|alpha>/pi.
  - Wigner grids live in quadrature coordinates where the vacuum is
    exp(-x^2-y^2)/pi, so the same coherent state sits at sqrt(2) beta.
Both integrate to one with the plain dx dy area element.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GridTooSmall, ParameterError, RecurrenceOverflow
from .master_equation import DensityMatrix
from .operators import OperatorMatrix

GRID_POINTS = 201
PEAK_FLOOR_FRAC = 1e-3
_BOUNDARY_FRAC = 1e-6


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1.0 + 1e-8:
            raise ParameterError(f"Bloch vector norm {self.norm():.12f} > 1")

    def norm(self):
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))


@dataclass(frozen=True)
class QuasiProbGrid:
    """Sampled quasi-probability distribution.

    values[i, j] is the density at (x_axis[j], y_axis[i]); rows scan y.
    """

    kind: str
    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("wigner", "husimi"):
            raise ParameterError(f"unknown grid kind {self.kind!r}")
        if self.values.shape != (len(self.y_axis), len(self.x_axis)):
            raise ParameterError("values shape does not match axes")

    def riemann_norm(self):
        dx = float(self.x_axis[1] - self.x_axis[0])
        dy = float(self.y_axis[1] - self.y_axis[0])
        return float(self.values.sum() * dx * dy)


def expectation(op: OperatorMatrix, rho: DensityMatrix):
    """tr(rho O); hermitian-tagged operators return a plain float."""
    if op.space.n_max != rho.space.n_max:
        raise DimensionMismatch(
            f"operator cutoff {op.space.n_max} vs state cutoff {rho.space.n_max}")
    val = complex(op.entries.multiply(rho.matrix.T).sum())
    return val.real if op.hermitian_hint else val


def reduce_field(rho: DensityMatrix) -> np.ndarray:
    """Trace out the atom; returns the (n_max+1)^2 field matrix."""
    n_ph = rho.space.n_max + 1
    r = rho.matrix.reshape(2, n_ph, 2, n_ph)
    return np.einsum("anam->nm", r)

def reduce_atom(rho: DensityMatrix) -> np.ndarray:
    n_ph = rho.space.n_max + 1
    r = rho.matrix.reshape(2, n_ph, 2, n_ph)
    return np.einsum("anbn->ab", r)


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    at = reduce_atom(rho)
    return BlochVector(
        x=float(2.0 * at[0, 1].real),
        y=float(-2.0 * at[0, 1].imag),
        z=float((at[1, 1] - at[0, 0]).real),
    )


def mean_photon(rho: DensityMatrix) -> float:
    pops = rho.photon_populations()
    return float(np.dot(np.arange(len(pops)), pops))


def field_amplitude(rho: DensityMatrix) -> complex:
    # <a> from the reduced field matrix: sum_n sqrt(n+1) rho[n+1, n]
    f = reduce_field(rho)
    n = np.arange(f.shape[0] - 1)
    return complex(np.sum(np.sqrt(n + 1) * f[n + 1, n]))


def _default_axis(half_width):
    return np.linspace(-half_width, half_width, GRID_POINTS)


def _support_radius(rho):
    # radius of the populated Fock shell, not the mean: bimodal states
    # put their lobes far outside sqrt(<n>)
    pops = rho.photon_populations()
    idx = int(np.searchsorted(np.cumsum(pops), 1.0 - 1e-9))
    return float(np.sqrt(min(idx, len(pops) - 1)))


def _check_boundary(values, kind):
    peak = values.max()
    edge = max(np.abs(values[0, :]).max(), np.abs(values[-1, :]).max(),
               np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max())
    if edge > _BOUNDARY_FRAC * peak:
        raise GridTooSmall(
            f"{kind} boundary weight {edge:.3e} exceeds "
            f"{_BOUNDARY_FRAC:.0e} of peak {peak:.3e}; widen the grid")


def husimi_q(rho: DensityMatrix, x_axis=None, y_axis=None) -> QuasiProbGrid:
    """Q(alpha) on a grid, default span ±(support radius + 4), 201 points.

    Coherent-state overlaps are built by the scaled-power recurrence
    v_k = v_{k-1} alpha / sqrt(k) starting from exp(-|alpha|^2 / 2),
    which stays bounded for any cutoff the solver can reach.
    """
    if x_axis is None:
        x_axis = _default_axis(_support_radius(rho) + 4.0)
    if y_axis is None:
        y_axis = _default_axis(_support_radius(rho) + 4.0)
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    field = reduce_field(rho)
    m = field.shape[0]

    xg, yg = np.meshgrid(x_axis, y_axis)
    alpha = (xg + 1j * yg).ravel()
    v = np.empty((alpha.size, m), dtype=complex)
    v[:, 0] = np.exp(-0.5 * np.abs(alpha) ** 2)
    for k in range(1, m):
        v[:, k] = v[:, k - 1] * alpha / np.sqrt(k)
    q = np.einsum("nk,nk->n", v.conj(), v @ field.T).real / np.pi
    values = q.reshape(len(y_axis), len(x_axis))
    grid = QuasiProbGrid("husimi", x_axis, y_axis, values)
    _check_boundary(values, "husimi")
    return grid


def wigner(rho: DensityMatrix, x_axis=None, y_axis=None) -> QuasiProbGrid:
    """W(x, y) on a grid, default span ±(sqrt(2) support radius + 4), 201 points.

    Iterative Laguerre-ladder evaluation: start every |m><n| component
    from the gaussian prefactor and climb with two-term recurrences.
    The prefactor-first ordering is what keeps the ladder finite at
    large cutoff; a direct Laguerre evaluation overflows near n ~ 150.
    """
    if x_axis is None:
        hw = np.sqrt(2.0) * _support_radius(rho) + 4.0
        x_axis = _default_axis(hw)
    if y_axis is None:
        hw = np.sqrt(2.0) * _support_radius(rho) + 4.0
        y_axis = _default_axis(hw)
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    field = reduce_field(rho)
    m = field.shape[0]

    xg, yg = np.meshgrid(x_axis, y_axis)
    a = 0.5 * np.sqrt(2.0) * (xg + 1j * yg)
    ladder = np.empty((m,) + a.shape, dtype=complex)
    ladder[0] = np.exp(-2.0 * np.abs(a) ** 2) / np.pi
    w = field[0, 0].real * ladder[0].real
    for n in range(1, m):
        ladder[n] = (2.0 * a * ladder[n - 1]) / np.sqrt(n)
        w = w + 2.0 * (field[0, n] * ladder[n]).real
    for row in range(1, m):
        prev = ladder[row].copy()
        ladder[row] = (2.0 * a.conj() * prev
                       - np.sqrt(row) * ladder[row - 1]) / np.sqrt(row)
        w = w + (field[row, row] * ladder[row]).real
        for n in range(row + 1, m):
            # ladder[n] still holds the previous row's |row-1><n| term here
            nxt = (2.0 * a.conj() * ladder[n] - np.sqrt(n) * prev) / np.sqrt(row)
            prev = ladder[n].copy()
            ladder[n] = nxt
            w = w + 2.0 * (field[row, n] * ladder[n]).real
    if not np.all(np.isfinite(w)):
        raise RecurrenceOverflow("Wigner ladder produced non-finite values")
    grid = QuasiProbGrid("wigner", x_axis, y_axis, values=w)
    _check_boundary(w, "wigner")
    return grid


def grid_peaks(grid: QuasiProbGrid, floor_frac=PEAK_FLOOR_FRAC):
    """Interior 3x3 local maxima above floor_frac of the global peak.

    Returns (x, y, value) triples sorted by height, highest first. The
    floor keeps ripple in the far tails from masquerading as structure.
    """
    v = grid.values
    floor = floor_frac * v.max()
    core = v[1:-1, 1:-1]
    mask = core >= floor
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= core > v[1 + di:v.shape[0] - 1 + di,
                             1 + dj:v.shape[1] - 1 + dj]
    iy, ix = np.nonzero(mask)
    peaks = [(float(grid.x_axis[j + 1]), float(grid.y_axis[i + 1]),
              float(core[i, j])) for i, j in zip(iy, ix)]
    return sorted(peaks, key=lambda p: -p[2])


def serialize_grid(grid: QuasiProbGrid) -> str:
    """Delimited text: kind and axes in # headers, then row-major values."""
    def fmt(arr):
        return " ".join(format(t, ".9g") for t in arr)

    lines = [f"# kind: {grid.kind}",
             f"# x: {fmt(grid.x_axis)}",
             f"# y: {fmt(grid.y_axis)}"]
    lines.extend(fmt(row) for row in grid.values)
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> QuasiProbGrid:
    kind = None
    x_axis = y_axis = None
    rows = []
    for line in text.splitlines():
        if line.startswith("# kind:"):
            kind = line.split(":", 1)[1].strip()
        elif line.startswith("# x:"):
            x_axis = np.array([float(t) for t in line.split(":", 1)[1].split()])
        elif line.startswith("# y:"):
            y_axis = np.array([float(t) for t in line.split(":", 1)[1].split()])
        elif line.strip() and not line.startswith("#"):
            rows.append([float(t) for t in line.split()])
    if kind is None or x_axis is None or y_axis is None:
        raise ParameterError("grid text is missing header lines")
    return QuasiProbGrid(kind, x_axis, y_axis, np.array(rows))
