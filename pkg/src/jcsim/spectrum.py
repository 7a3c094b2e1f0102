"""Closed-form spectral data of the coupled atom-cavity ladder.

Every returned line carries a picture tag (schrodinger or interaction)
and a units tag, because the same symbol means different things in
different frames and serialized tables must be unambiguous.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AboveCollapse, ParameterError
from .params import SystemParams


@dataclass(frozen=True)
class SpectralLine:
    """One ladder frequency: excitation index, branch sign, tagged value."""

    n: int
    sign: int
    value: float
    picture: str
    units: str

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError(f"excitation index must be >= 0, got {self.n}")
        if self.sign not in (-1, 1):
            raise ParameterError("sign must be +1 or -1")
        if not np.isfinite(self.value):
            raise ParameterError("line value must be finite")
        if self.picture not in ("schrodinger", "interaction"):
            raise ParameterError(f"unknown picture {self.picture!r}")


def dressed_frequencies(n: int, omega0: float, g: float):
    """Coupled-ladder doublet n*omega0 ± sqrt(n) g, in the input units."""
    if n < 1:
        raise ParameterError("need n >= 1")
    split = np.sqrt(n) * g
    return (SpectralLine(n, +1, float(n * omega0 + split), "schrodinger", "absolute"),
            SpectralLine(n, -1, float(n * omega0 - split), "schrodinger", "absolute"))


def quasi_energies(m: int, params: SystemParams):
    """Drive-dressed quasi-frequency pair, in units of g.

    ± sqrt(m) [1 - (2 eps_d/g)^2]^(3/4); shrinks with drive and hits
    exactly zero at eps_d = g/2, beyond which the ladder has collapsed.
    """
    if m < 1:
        raise ParameterError("need m >= 1")
    if params.g == 0.0:
        raise ParameterError("needs g > 0")
    ratio = 2.0 * params.eps_d / params.g
    if ratio > 1.0:
        raise AboveCollapse(
            f"2 eps_d/g = {ratio:.4f} > 1: discrete quasi-energies have collapsed")
    mag = float(np.sqrt(m) * (1.0 - ratio * ratio) ** 0.75)
    return (SpectralLine(m, +1, mag, "interaction", "g"),
            SpectralLine(m, -1, -mag, "interaction", "g"))


def resonance_detuning(n: int, params: SystemParams):
    """Detunings ±1/sqrt(n) (units of g) where the n-photon peak sits."""
    if n < 1:
        raise ParameterError("need n >= 1")
    val = float(1.0 / np.sqrt(n))
    return (SpectralLine(n, +1, val, "schrodinger", "g"),
            SpectralLine(n, -1, -val, "schrodinger", "g"))


def blockade_detuning(n: int, params: SystemParams):
    """Effective detuning blocking the next ladder step, ∓ sqrt(n_sc/n) in kappa units.

    Assumes the drive sits on the n-photon resonance of the matching branch.
    """
    if n < 1:
        raise ParameterError("need n >= 1")
    n_sc = (params.g / (2.0 * params.kappa)) ** 2
    val = float(np.sqrt(n_sc / n))
    return (SpectralLine(n, +1, -val, "schrodinger", "kappa"),
            SpectralLine(n, -1, +val, "schrodinger", "kappa"))


def serialize_lines(lines) -> str:
    """Delimited table: n, sign, value, picture, units."""
    rows = ["# columns: n sign value picture units"]
    for ln in lines:
        rows.append(f"{ln.n} {'+' if ln.sign > 0 else '-'} "
                    f"{format(ln.value, '.9g')} {ln.picture} {ln.units}")
    return "\n".join(rows) + "\n"
