"""End-to-end checks pinning the headline numbers this package reproduces.

One test per numbered criterion, each reported as a visible pass/fail
line by the hook in conftest.py. Tolerances and runtime budgets are part
of the contract: a red criterion means the physics or the performance
regressed, not that a bound needs loosening. The strong-coupling panel
checks at the end are heavier companions to criterion 4 and only run
with JCSIM_RUN_SLOW=1.
"""

import time

import numpy as np
import pytest

from jcsim.harness import boundary_search, load_scenario, run_scenario
from jcsim.master_equation import steady_state
from jcsim.observables import grid_peaks, husimi_q, mean_photon, wigner
from jcsim.params import from_config
from jcsim.semiclassical import (above_threshold, asymptotic_roots,
                                 neoclassical_roots, offset_detuning)
from jcsim.spectrum import quasi_energies
from jcsim.trajectories import ScanSchedule, ensemble_mean, run_trajectory

pytestmark = pytest.mark.acceptance


def solve(n_max, g, eps, delta, gamma=0.0, tail_tol=None):
    p = from_config(dict(g_over_kappa=g, eps_over_g=eps, delta_over_g=delta,
                         gamma_over_kappa=gamma, n_max=n_max))
    if tail_tol is None:
        return steady_state(p)
    return steady_state(p, tail_tol=tail_tol)


def test_criterion_01_bistable_window_photon_numbers():
    t0 = time.monotonic()
    for delta, want in ((0.4500, 0.46), (0.4520, 1.49), (0.4526, 1.03)):
        assert mean_photon(solve(25, 5000, 0.09, delta)) == \
            pytest.approx(want, abs=0.03)
    assert time.monotonic() - t0 < 10.0


def test_criterion_02_blockade_peaks_at_inverse_sqrt_n():
    t0 = time.monotonic()
    deltas = np.linspace(0.3, 1.1, 200)
    means = np.array([mean_photon(solve(20, 200, 0.09, d)) for d in deltas])
    interior = (means[1:-1] > means[:-2]) & (means[1:-1] > means[2:])
    maxima = deltas[1:-1][interior]
    for n in range(1, 6):
        assert np.min(np.abs(maxima - 1.0 / np.sqrt(n))) < 0.02
    assert time.monotonic() - t0 < 120.0


def test_criterion_03_vacuum_rabi_saturation():
    t0 = time.monotonic()
    assert mean_photon(solve(20, 5000, 0.02, 1.0)) == \
        pytest.approx(0.25, abs=0.05)
    assert time.monotonic() - t0 < 5.0


def test_criterion_04_spontaneous_emission_collapses_bimodality():
    t0 = time.monotonic()
    assert mean_photon(solve(140, 100, 0.245, 0.1)) == \
        pytest.approx(36.4, rel=0.10)
    assert mean_photon(solve(140, 100, 0.245, 0.1, gamma=1.0)) == \
        pytest.approx(2.2, rel=0.15)
    assert time.monotonic() - t0 < 300.0


def test_criterion_05_critical_point_excitation_and_bimodality():
    # tail weight decays slowly here; 1e-3 on the top two Fock levels
    # still leaves the mean four digits stable (cutoff study in the
    # truncation tests)
    t0 = time.monotonic()
    rho = solve(200, 100, 0.495, 0.0, tail_tol=1e-3)
    assert mean_photon(rho) == pytest.approx(29.0, rel=0.10)
    (x1, y1, _), (x2, y2, _) = grid_peaks(husimi_q(rho))[:2]
    assert y1 * y2 < 0
    assert min(abs(y1), abs(y2)) > 2.0
    assert abs(y1 + y2) < 0.5
    assert abs(x1) < 1.5 and abs(x2) < 1.5
    assert time.monotonic() - t0 < 300.0


def test_criterion_06_first_order_boundary_location():
    t0 = time.monotonic()
    ratios = dict(eps_over_g=0.245, delta_over_g=0.1, gamma_over_kappa=0.0)
    g_c = boundary_search(ratios, 20.0, 100.0)
    assert 38.0 <= g_c <= 48.0
    assert time.monotonic() - t0 < 1800.0


def test_criterion_07_phase_bistability_geometry():
    t0 = time.monotonic()
    rho = solve(150, 25, 0.6, 0.0, tail_tol=1e-4)
    (x1, y1, _), (x2, y2, _) = grid_peaks(husimi_q(rho))[:2]
    angles = np.arctan2([y1, y2], [x1, x2])
    assert angles[0] == pytest.approx(-angles[1], abs=0.05)
    for ang in angles:
        assert abs(abs(ang) - 0.98) < 0.1
    for x, y in ((x1, y1), (x2, y2)):
        assert x * x + y * y == pytest.approx(68.75, rel=0.15)
    assert time.monotonic() - t0 < 600.0


def test_criterion_08_semiclassical_identities():
    t0 = time.monotonic()
    # phase-bistable pair: squared modulus of the state equals the
    # closed-form photon number
    for r in np.linspace(0.501, 2.0, 100):
        ts = above_threshold(from_config(dict(
            g_over_kappa=25, eps_over_g=float(r), delta_over_g=0.0,
            gamma_over_kappa=0.0, n_max=5)))
        assert abs(abs(ts.alpha_plus) ** 2 - ts.amp2) < 1e-12
    # every driven quasi-energy collapses at half the coupling
    collapse = from_config(dict(g_over_kappa=100, eps_over_g=0.5,
                                delta_over_g=0.0, gamma_over_kappa=0.0,
                                n_max=5))
    for m in range(1, 6):
        assert all(line.value == 0.0 for line in quasi_energies(m, collapse))
    # bistability-offset detuning limits, weak and strong drive
    weak = from_config(dict(g_over_kappa=1.0, eps_over_g=1e-6,
                            delta_over_g=0.0, gamma_over_kappa=0.0, n_max=5))
    up, down = offset_detuning(weak)
    assert up == pytest.approx(1.0, rel=1e-6)
    assert down == -up
    strong = from_config(dict(g_over_kappa=1.0, eps_over_g=1000.0,
                              delta_over_g=0.0, gamma_over_kappa=0.0,
                              n_max=5))
    up, _ = offset_detuning(strong)
    assert up == pytest.approx(strong.kappa / (2.0 * strong.eps_d), rel=1e-6)
    # detuned asymptotic branch values meet the exact mean-field roots
    deep = from_config(dict(g_over_kappa=1e4, eps_over_g=0.3,
                            delta_over_g=0.1, gamma_over_kappa=0.0, n_max=5))
    outer = sorted(neoclassical_roots(deep))[-2:]
    asym = asymptotic_roots(deep)
    assert asym.amp2_minus == pytest.approx(outer[0], rel=0.01)
    assert asym.amp2_plus == pytest.approx(outer[1], rel=0.01)
    assert time.monotonic() - t0 < 1.0


def test_criterion_09_weak_drive_resonance_law():
    t0 = time.monotonic()
    assert mean_photon(solve(12, 100, 0.05, 0.0)) == \
        pytest.approx(2.0 * 0.05 ** 4, rel=0.20)
    assert time.monotonic() - t0 < 5.0


def test_criterion_10_unraveling_matches_master_equation():
    t0 = time.monotonic()
    p = from_config(dict(g_over_kappa=5, eps_over_g=0.09, delta_over_g=1.0,
                         gamma_over_kappa=0.0, n_max=15))
    target = mean_photon(steady_state(p))
    sched = ScanSchedule(kind="constant", t_total=15.0)
    recs = [run_trajectory(p, sched, seed, 0.25, refine=2)
            for seed in range(200)]
    ens = ensemble_mean(recs, "n")
    q = len(ens.times) // 4
    mean = ens.mean[-q:].mean()
    stderr = float(np.sqrt(np.mean(ens.stderr[-q:] ** 2) / q))
    assert abs(mean - target) < 3.0 * stderr
    assert time.monotonic() - t0 < 600.0


def test_criterion_11_property_bundle(tmp_path):
    # invariants on a fresh solve
    rho = solve(20, 200, 0.09, 0.578)
    rho.validate()
    # quasi-probability normalization and positivity
    q = husimi_q(rho)
    assert q.riemann_norm() == pytest.approx(1.0, abs=1e-2)
    assert wigner(rho).riemann_norm() == pytest.approx(1.0, abs=1e-2)
    assert q.values.min() >= -1e-12
    # seed determinism, byte for byte
    p = from_config(dict(g_over_kappa=5, eps_over_g=0.09, delta_over_g=1.0,
                         gamma_over_kappa=0.0, n_max=12))
    sched = ScanSchedule(kind="constant", t_total=3.0)
    r1 = run_trajectory(p, sched, 17, 0.25)
    r2 = run_trajectory(p, sched, 17, 0.25)
    assert r1.a_mean.tobytes() == r2.a_mean.tobytes()
    assert r1.n_mean.tobytes() == r2.n_mean.tobytes()
    # worker count must not leak into harness output bytes
    payload = dict(kind="steady_scan", g_over_kappa=5, eps_over_g=0.09,
                   delta_over_g=1.0, gamma_over_kappa=0, n_max=12,
                   sweep="delta_over_g", sweep_start=0.8, sweep_stop=1.2,
                   sweep_points=4)
    outs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}"
        out.mkdir()
        ini = tmp_path / f"w{workers}.ini"
        lines = ["[scenario]"] + [f"{k} = {v}" for k, v in payload.items()]
        lines += [f"workers = {workers}", f"out = {out}"]
        ini.write_text("\n".join(lines) + "\n")
        run_scenario(load_scenario(ini))
        outs.append((out / "steady_scan.txt").read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.slow
class TestStrongCouplingPanels:
    """Heavier companions to criterion 4 at coupling 1e4.

    Photon tails decay slowly out here, so both runs carry an explicit
    tail budget and a cutoff measured to hold the mean stable at the
    asserted precision.
    """

    def test_bright_panel(self):
        assert mean_photon(solve(190, 1e4, 0.245, 0.1, tail_tol=1e-5)) == \
            pytest.approx(42.8, rel=0.10)

    def test_damped_panel(self):
        assert mean_photon(
            solve(210, 1e4, 0.245, 0.1, gamma=1.0, tail_tol=1e-4)) == \
            pytest.approx(3.7, rel=0.15)
