"""Diffusive stochastic unraveling of the master equation.

One normalized state diffuses under two decay channels, L1 = sqrt(2 kappa) a
and L2 = sqrt(gamma) sigma_minus, each fed by its own complex Wiener
process. The deterministic linear part of the state equation (coupling,
drive, detuning, damping back-action) advances by its exact matrix
exponential each substep; only the expectation-dependent drift and the
noise coupling take an explicit Euler step. Their rates scale with
kappa and gamma, not with the coupling, so the step size survives deep
strong coupling where a plain Euler split pumps weight into the highest
Fock states instead of converging.

Reproducibility contract: identical (params, schedule, seed) gives
bit-identical records, independent of how the stepper subdivides. That
is achieved by drawing all noise on a fixed fine grid
(dt_noise = sample_dt / 64) from a counter-based generator keyed by the
seed, and Brownian-bridging the grid increments whenever the stepper
cuts an interval finer. Bridge normals come from a second stream keyed
by (seed, interval index), so subdivision never consumes base noise.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.linalg import expm

from .errors import (BandsOverlap, ParameterError, ScheduleMismatch,
                     StepUnderflow)
from .observables import BlochVector
from .operators import TruncatedSpace, annihilation, atom_operators
from .params import SystemParams

NOISE_STREAM = 0x9E3779B97F4A7C15
BRIDGE_STREAM = 0xC2B2AE3D27D4EB4F
FINE_PER_SAMPLE = 64
DRIFT_CAP = 0.1
MIN_STEP_KAPPA = 1e-12


@dataclass(frozen=True)
class ScanSchedule:
    """Piecewise-linear control of one parameter over [0, t_total].

    kind: constant (nothing ramps), detuning_ramp (delta_omega/g runs
    start -> end), or drive_triangle (eps_d/g runs start -> end -> start
    with the turning point at t_total/2). start/end are ratios to g.
    """

    kind: str
    t_total: float
    start: float = 0.0
    end: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "detuning_ramp", "drive_triangle"):
            raise ParameterError(f"unknown schedule kind {self.kind!r}")
        if self.t_total <= 0:
            raise ParameterError("t_total must be positive")


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    seed: int
    times: np.ndarray
    a_mean: np.ndarray
    n_mean: np.ndarray
    bloch: tuple
    schedule: ScanSchedule

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must increase")
        if np.any(self.n_mean < 0):
            raise ParameterError("photon number went negative")
        # bloch entries are BlochVector instances, norm-checked on construction


@dataclass(frozen=True, eq=False)
class EnsembleSeries:
    observable: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_records: int


@dataclass(frozen=True)
class DwellStats:
    low_dwells: tuple
    high_dwells: tuple
    switch_count: int


@njit(cache=True)
def _spmv(indptr, indices, data, x, out):
    for i in range(indptr.shape[0] - 1):
        acc = 0.0 + 0.0j
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc


@njit(cache=True)
def _em_interval(psi, m, h, eh, l1p, l1i, l1d, l2p, l2i, l2d, w1, w2):
    """m substeps of the normalized diffusive state equation.

    Strang split: eh is the exact propagator of the linear drift over
    h/2, applied before and after one Euler step of the
    channel-expectation drift and the noise coupling. Renormalization
    follows every stage. The symmetric split cancels the first-order
    splitting bias; what remains scales with the channel strengths
    alone, not with the coupling.
    """
    dim = psi.shape[0]
    l1psi = np.empty(dim, np.complex128)
    l2psi = np.empty(dim, np.complex128)
    for j in range(m):
        lin = np.dot(eh, psi)
        norm2 = 0.0
        for i in range(dim):
            norm2 += lin[i].real * lin[i].real + lin[i].imag * lin[i].imag
        inv = 1.0 / np.sqrt(norm2)
        for i in range(dim):
            lin[i] *= inv
        _spmv(l1p, l1i, l1d, lin, l1psi)
        _spmv(l2p, l2i, l2d, lin, l2psi)
        l1 = 0.0 + 0.0j
        l2 = 0.0 + 0.0j
        for i in range(dim):
            l1 += np.conj(lin[i]) * l1psi[i]
            l2 += np.conj(lin[i]) * l2psi[i]
        l1c = np.conj(l1)
        l2c = np.conj(l2)
        half = 0.5 * (l1.real * l1.real + l1.imag * l1.imag
                      + l2.real * l2.real + l2.imag * l2.imag)
        for i in range(dim):
            val = lin[i] + h * (l1c * l1psi[i] + l2c * l2psi[i]
                                - half * lin[i])
            val += (l1psi[i] - l1 * lin[i]) * w1[j]
            val += (l2psi[i] - l2 * lin[i]) * w2[j]
            lin[i] = val
        out = np.dot(eh, lin)
        norm2 = 0.0
        for i in range(dim):
            norm2 += out[i].real * out[i].real + out[i].imag * out[i].imag
        inv = 1.0 / np.sqrt(norm2)
        for i in range(dim):
            psi[i] = out[i] * inv


def _csr_parts(m):
    c = m.tocsr()
    c.sort_indices()
    return c.indptr, c.indices, c.data.astype(np.complex128)


def _ramp_coeffs(params, schedule, t):
    """dw and eps at time t plus their slopes, exact for the linear pieces."""
    g = params.g
    if schedule.kind == "detuning_ramp":
        slope = (schedule.end - schedule.start) * g / schedule.t_total
        return schedule.start * g + slope * t, slope, params.eps_d, 0.0
    if schedule.kind == "drive_triangle":
        half = 0.5 * schedule.t_total
        slope = (schedule.end - schedule.start) * g / half
        if t < half:
            return params.delta_omega, 0.0, schedule.start * g + slope * t, slope
        return (params.delta_omega, 0.0,
                schedule.end * g - slope * (t - half), -slope)
    return params.delta_omega, 0.0, params.eps_d, 0.0


def _remainder_bound(params):
    # worst-case rate of the expectation drift plus noise variance,
    # reached only if all weight sits on the top Fock level
    return 2.0 * (2.0 * params.kappa * (params.n_max + 1) + params.gamma)


def run_trajectory(params: SystemParams, schedule: ScanSchedule, seed: int,
                   sample_dt: float, refine: int = 1) -> TrajectoryRecord:
    """Integrate one realization from the ground state, sampling every sample_dt.

    refine multiplies the substep count on the same Brownian path, so
    raising it tightens the weak bias without changing the realization.
    The bias matters most where the conditional state hops between
    metastable lobes, whose switching rates feel the noise step.
    """
    if sample_dt <= 0:
        raise ParameterError("sample_dt must be positive")
    if refine < 1 or int(refine) != refine:
        raise ParameterError("refine must be a positive integer")
    refine = int(refine)
    n_samples = max(1, int(round(schedule.t_total / sample_dt)))
    sample_dt = schedule.t_total / n_samples
    dt_noise = sample_dt / FINE_PER_SAMPLE
    n_fine = n_samples * FINE_PER_SAMPLE

    space = TruncatedSpace(params.n_max)
    a = annihilation(space).entries
    sm = atom_operators(space)["sigma_minus"].entries
    ad = a.conj().T
    nexc = (sm.conj().T @ sm + ad @ a).tocsr()
    # static drift: coupling, minus half the channel back-action
    a0 = (params.g * (ad @ sm - a @ sm.conj().T)
          - params.kappa * (ad @ a)
          - 0.5 * params.gamma * (sm.conj().T @ sm)).tocsr()
    dd = (ad - a).tocsr()
    l1 = (np.sqrt(2.0 * params.kappa) * a).tocsr()
    if params.gamma > 0:
        l2 = (np.sqrt(params.gamma) * sm).tocsr()
    else:
        l2 = sp.csr_matrix(a.shape, dtype=complex)
    l1p, l1i, l1d = _csr_parts(l1)
    l2p, l2i, l2d = _csr_parts(l2)
    a0_d = a0.toarray()
    nx_d = nexc.toarray()
    dd_d = dd.toarray()
    ecache = {}

    def propagator(m, dw, eps, cacheable):
        # half-step exponential, applied on both sides of the noise step
        key = (m, dw, eps)
        if cacheable and key in ecache:
            return ecache[key]
        mat = expm((a0_d + (1j * dw) * nx_d + eps * dd_d)
                   * (0.5 * dt_noise / m))
        if cacheable:
            ecache[key] = mat
        return mat

    gen = np.random.Generator(np.random.Philox(key=[seed, NOISE_STREAM]))
    z = gen.standard_normal((n_fine, 2, 2))
    fine_noise = (z[:, :, 0] + 1j * z[:, :, 1]) * np.sqrt(0.5 * dt_noise)

    bound = _remainder_bound(params)
    # k_base guards stability against the static bound, the per-interval
    # probe below tightens the step to the state actually reached
    k_base = max(0, int(np.ceil(np.log2(max(dt_noise * bound, 1.0)))))
    min_step = MIN_STEP_KAPPA / params.kappa

    psi = np.zeros(space.dim, dtype=np.complex128)
    psi[0] = 1.0

    times = np.arange(n_samples + 1) * sample_dt
    a_series = np.empty(n_samples + 1, dtype=complex)
    n_series = np.empty(n_samples + 1)
    bloch = []

    def record(k):
        apsi = a @ psi
        a_series[k] = np.vdot(psi, apsi)
        n_series[k] = max(float(np.vdot(apsi, apsi).real), 0.0)
        n_ph = space.n_max + 1
        at = psi.reshape(2, n_ph)
        rho01 = np.vdot(at[1], at[0])  # reduced-atom coherence <g|rho_at|e>
        pg = float(np.vdot(at[0], at[0]).real)
        pe = float(np.vdot(at[1], at[1]).real)
        bloch.append(BlochVector(x=2.0 * rho01.real, y=-2.0 * rho01.imag,
                                 z=pe - pg))

    record(0)
    for idx in range(n_fine):
        t0 = idx * dt_noise
        dw0, dws, eps0, epss = _ramp_coeffs(params, schedule, t0)
        dw_mid = dw0 + 0.5 * dws * dt_noise
        eps_mid = eps0 + 0.5 * epss * dt_noise
        l1psi = l1 @ psi
        l2psi = l2 @ psi
        e1 = np.vdot(psi, l1psi)
        e2 = np.vdot(psi, l2psi)
        drift = (np.conj(e1) * l1psi + np.conj(e2) * l2psi
                 - 0.5 * (abs(e1) ** 2 + abs(e2) ** 2) * psi)
        var = (max(float(np.vdot(l1psi, l1psi).real) - abs(e1) ** 2, 0.0)
               + max(float(np.vdot(l2psi, l2psi).real) - abs(e2) ** 2, 0.0))
        rate = float(np.linalg.norm(drift)) + var
        k_extra = 0
        h = dt_noise / (1 << k_base)
        if rate * h > DRIFT_CAP:
            k_extra = int(np.ceil(np.log2(rate * h / DRIFT_CAP)))
        m = refine << (k_base + k_extra)
        h = dt_noise / m
        if h < min_step:
            raise StepUnderflow(f"substep {h:.3e} under {min_step:.3e}")
        eh = propagator(m, dw_mid, eps_mid, dws == 0.0 and epss == 0.0)
        if m == 1:
            w1 = fine_noise[idx, 0:1]
            w2 = fine_noise[idx, 1:2]
        else:
            bgen = np.random.Generator(
                np.random.Philox(key=[seed, BRIDGE_STREAM ^ idx]))
            zb = bgen.standard_normal((m, 2, 2))
            zc = zb[:, :, 0] + 1j * zb[:, :, 1]
            zc -= zc.mean(axis=0)
            w = fine_noise[idx] / m + np.sqrt(0.5 * h) * zc
            w1 = np.ascontiguousarray(w[:, 0])
            w2 = np.ascontiguousarray(w[:, 1])
        _em_interval(psi, m, h, eh, l1p, l1i, l1d, l2p, l2i, l2d, w1, w2)
        if (idx + 1) % FINE_PER_SAMPLE == 0:
            nrm = float(np.linalg.norm(psi))
            assert abs(nrm - 1.0) <= 1e-8, f"norm drifted to {nrm!r}"
            record((idx + 1) // FINE_PER_SAMPLE)

    return TrajectoryRecord(seed=seed, times=times, a_mean=a_series,
                            n_mean=n_series, bloch=tuple(bloch),
                            schedule=schedule)


_OBSERVABLES = {
    "n": lambda r: r.n_mean,
    "re_a": lambda r: r.a_mean.real,
    "im_a": lambda r: r.a_mean.imag,
    "x": lambda r: np.array([b.x for b in r.bloch]),
    "y": lambda r: np.array([b.y for b in r.bloch]),
    "z": lambda r: np.array([b.z for b in r.bloch]),
}


def ensemble_mean(records, observable: str) -> EnsembleSeries:
    """Pointwise mean and standard error across records."""
    if observable not in _OBSERVABLES:
        raise ParameterError(f"unknown observable {observable!r}")
    if len(records) < 2:
        raise ParameterError("need at least 2 records for a standard error")
    first = records[0]
    for r in records[1:]:
        if r.schedule != first.schedule or not np.array_equal(r.times, first.times):
            raise ScheduleMismatch("records were sampled on different schedules")
    data = np.stack([_OBSERVABLES[observable](r) for r in records])
    return EnsembleSeries(
        observable=observable,
        times=first.times,
        mean=data.mean(axis=0),
        stderr=data.std(axis=0, ddof=1) / np.sqrt(len(records)),
        n_records=len(records))


def dwell_statistics(record: TrajectoryRecord, thresholds,
                     signal: str = "n") -> DwellStats:
    """Segment a record into low/high/transit and collect dwell times.

    thresholds is a pair of disjoint (lo, hi) bands on the chosen
    signal; samples between the bands count as transit and extend no
    dwell. A switch is completed each time the trajectory commits to
    the opposite band.
    """
    if signal not in _OBSERVABLES:
        raise ParameterError(f"unknown signal {signal!r}")
    (a_lo, a_hi), (b_lo, b_hi) = thresholds
    if a_lo >= a_hi or b_lo >= b_hi:
        raise ParameterError("each band needs lo < hi")
    low, high = sorted([(a_lo, a_hi), (b_lo, b_hi)])
    if low[1] >= high[0]:
        raise BandsOverlap(f"bands {low} and {high} overlap")
    series = _OBSERVABLES[signal](record)
    dt = float(record.times[1] - record.times[0])

    dwells = {"low": [], "high": []}
    current = None
    run = 0
    committed = None
    switches = 0
    for v in series:
        state = "low" if low[0] <= v <= low[1] else \
            "high" if high[0] <= v <= high[1] else None
        if state == current and state is not None:
            run += 1
            continue
        if current is not None:
            dwells[current].append(run * dt)
        if state is not None:
            if committed is not None and state != committed:
                switches += 1
            committed = state
            run = 1
        current = state
    if current is not None:
        dwells[current].append(run * dt)
    return DwellStats(low_dwells=tuple(dwells["low"]),
                      high_dwells=tuple(dwells["high"]),
                      switch_count=switches)


def record_to_text(record: TrajectoryRecord, params: SystemParams) -> str:
    """Header (params, schedule, seed), then time, Re<a>, Im<a>, <n>, X, Y, Z."""
    s = record.schedule
    head = [
        "# params: g={:.9g} kappa={:.9g} gamma={:.9g} delta_omega={:.9g} "
        "eps_d={:.9g} n_max={}".format(params.g, params.kappa, params.gamma,
                                       params.delta_omega, params.eps_d,
                                       params.n_max),
        f"# schedule: kind={s.kind} t_total={s.t_total:.9g} "
        f"start={s.start:.9g} end={s.end:.9g}",
        f"# seed: {record.seed}",
        "# columns: time re_a im_a n x y z",
    ]
    rows = []
    for k in range(len(record.times)):
        b = record.bloch[k]
        rows.append(" ".join(format(v, ".9g") for v in (
            record.times[k], record.a_mean[k].real, record.a_mean[k].imag,
            record.n_mean[k], b.x, b.y, b.z)))
    return "\n".join(head + rows) + "\n"
