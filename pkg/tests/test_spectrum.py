import numpy as np
import pytest

from jcsim.errors import AboveCollapse, ParameterError
from jcsim.params import SystemParams, from_config
from jcsim.spectrum import (SpectralLine, blockade_detuning,
                            dressed_frequencies, quasi_energies,
                            resonance_detuning, serialize_lines)


def make(**kw):
    base = dict(g_over_kappa=200, eps_over_g=0.1, delta_over_g=1.0,
                gamma_over_kappa=0, n_max=5)
    base.update(kw)
    return from_config(base)


class TestSpectralLine:
    def test_field_validation(self):
        with pytest.raises(ParameterError):
            SpectralLine(-1, 1, 0.5, "schrodinger", "g")
        with pytest.raises(ParameterError):
            SpectralLine(1, 0, 0.5, "schrodinger", "g")
        with pytest.raises(ParameterError):
            SpectralLine(1, 1, np.inf, "schrodinger", "g")
        with pytest.raises(ParameterError):
            SpectralLine(1, 1, 0.5, "heisenberg", "g")


class TestDressedFrequencies:
    def test_first_doublet(self):
        up, dn = dressed_frequencies(1, omega0=10.0, g=0.3)
        assert (up.value, dn.value) == (pytest.approx(10.3), pytest.approx(9.7))

    def test_splitting_grows_with_sqrt_n(self):
        up, dn = dressed_frequencies(4, omega0=10.0, g=0.3)
        assert up.value - dn.value == pytest.approx(4 * 0.3)

    def test_high_rung_spacing_approaches_inverse_sqrt(self):
        # spacing of the upper branch tends to omega0 + g/(2 sqrt(n))
        n, omega0, g = 100, 1.0, 0.5
        up_n = dressed_frequencies(n, omega0, g)[0]
        up_next = dressed_frequencies(n + 1, omega0, g)[0]
        spacing = up_next.value - up_n.value
        assert spacing == pytest.approx(omega0 + g / (2 * np.sqrt(n)), rel=1e-2)

    def test_rejects_vacuum_rung(self):
        with pytest.raises(ParameterError):
            dressed_frequencies(0, 1.0, 0.1)


class TestQuasiEnergies:
    def test_undriven_reduces_to_bare_ladder(self):
        for m in (1, 2, 5):
            up, dn = quasi_energies(m, make(eps_over_g=0.0))
            assert up.value == pytest.approx(np.sqrt(m))
            assert dn.value == -up.value

    def test_collapse_point_is_exactly_zero(self):
        up, dn = quasi_energies(3, make(eps_over_g=0.5))
        assert up.value == 0.0 and dn.value == 0.0

    def test_three_quarter_power_below_collapse(self):
        up, _ = quasi_energies(1, make(eps_over_g=0.3))  # 2 eps/g = 0.6
        assert up.value == pytest.approx(0.71554, abs=1e-5)

    def test_beyond_collapse_rejected(self):
        with pytest.raises(AboveCollapse):
            quasi_energies(1, make(eps_over_g=0.51))

    def test_decoupled_rejected(self):
        p = SystemParams(g=0.0, kappa=1.0, gamma=0.0, delta_omega=0.0,
                         eps_d=0.1, n_max=5)
        with pytest.raises(ParameterError):
            quasi_energies(1, p)

    def test_monotone_decreasing_in_drive(self):
        ratios = np.linspace(0.0, 0.499, 40)
        vals = [quasi_energies(2, make(eps_over_g=r))[0].value for r in ratios]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_tags(self):
        up, _ = quasi_energies(1, make(eps_over_g=0.1))
        assert (up.picture, up.units) == ("interaction", "g")


class TestResonanceDetuning:
    def test_low_rungs(self):
        assert resonance_detuning(1, make())[0].value == pytest.approx(1.0)
        assert resonance_detuning(5, make())[0].value == pytest.approx(0.4472136)
        assert resonance_detuning(6, make())[0].value == pytest.approx(0.4082483)

    def test_pair_is_symmetric(self):
        up, dn = resonance_detuning(3, make())
        assert dn.value == -up.value

    def test_strictly_decreasing_towards_zero(self):
        vals = [resonance_detuning(n, make())[0].value for n in range(1, 200)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.1


class TestBlockadeDetuning:
    def test_magnitude_kappa_at_the_critical_photon_number(self):
        p = make(g_over_kappa=200)  # n_sc = 100^2 = 1e4
        up, dn = blockade_detuning(10_000, p)
        assert up.value == pytest.approx(-1.0)
        assert dn.value == pytest.approx(+1.0)
        assert up.units == "kappa"

    def test_low_rung_value(self):
        up, _ = blockade_detuning(5, make(g_over_kappa=200))
        assert abs(up.value) == pytest.approx(np.sqrt(1e4 / 5))
        assert abs(up.value) == pytest.approx(44.72136, abs=1e-4)

    def test_upper_branch_blocks_downward(self):
        up, dn = blockade_detuning(7, make())
        assert up.value < 0 < dn.value

    def test_consistency_with_dressed_ladder_gaps(self):
        # drive tuned to the n-photon upper-branch resonance; the gap to the
        # next rung, measured from m drive quanta, should match the closed
        # form to 10% once n is large
        p = make(g_over_kappa=200)
        g, k = p.g, p.kappa
        omega0 = 50.0 * g  # arbitrary bare frequency, cancels in the gap
        for n in (10, 25, 100):
            omega_d = omega0 + g / np.sqrt(n)
            up_next = dressed_frequencies(n + 1, omega0, g)[0]
            up_n = dressed_frequencies(n, omega0, g)[0]
            gap = (up_next.value - up_n.value) - omega_d
            closed = blockade_detuning(n, p)[0].value * k
            assert gap < 0  # next rung sits below the next drive quantum
            assert gap == pytest.approx(closed, rel=0.1)


class TestSerializeLines:
    def test_table_layout(self):
        lines = list(dressed_frequencies(2, 1.0, 0.25))
        lines += list(resonance_detuning(2, make()))
        text = serialize_lines(lines)
        rows = text.strip().splitlines()
        assert rows[0] == "# columns: n sign value picture units"
        assert len(rows) == 5
        cells = rows[1].split()
        assert cells[0] == "2" and cells[1] == "+"
        assert float(cells[2]) == pytest.approx(2.0 + np.sqrt(2) * 0.25)
        assert cells[3:] == ["schrodinger", "absolute"]

    def test_round_trips_through_loadtxt(self):
        text = serialize_lines(resonance_detuning(3, make()))
        vals = np.loadtxt(text.splitlines(), usecols=2, comments="#")
        assert vals == pytest.approx([1 / np.sqrt(3), -1 / np.sqrt(3)])
