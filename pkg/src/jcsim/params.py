"""Physical parameters and the dimensionless scales derived from them.

Internal unit convention: hbar = 1 and the cavity field decay rate kappa
sets the frequency unit, so configs expressed as ratios load with
kappa = 1. All other modules take a SystemParams and never re-derive
units on their own.
"""

from dataclasses import dataclass

from .errors import ParameterError

_CONFIG_KEYS = ("g_over_kappa", "eps_over_g", "delta_over_g",
                "gamma_over_kappa", "n_max")


@dataclass(frozen=True)
class SystemParams:
    """Raw rates of the driven oscillator plus the photon cutoff.

    g            dipole coupling rate
    kappa        cavity field decay rate
    gamma        atomic energy decay rate
    delta_omega  drive detuning from the bare resonance (omega_d - omega_0)
    eps_d        coherent drive amplitude
    n_max        highest retained photon number
    """

    g: float
    kappa: float
    gamma: float
    delta_omega: float
    eps_d: float
    n_max: int

    def __post_init__(self):
        if self.g < 0:
            raise ParameterError(f"coupling g must be >= 0, got {self.g}")
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.eps_d < 0:
            raise ParameterError(f"drive eps_d must be >= 0, got {self.eps_d}")
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ParameterError(f"n_max must be an integer >= 1, got {self.n_max}")


@dataclass(frozen=True)
class ScaleSet:
    """Dimensionless numbers that organise the parameter space.

    n_sc          g^2 / (4 kappa^2), photon scale of the strong-coupling limit
    n_wc          gamma^2 / (8 g^2), saturation scale of the weak-coupling limit
    n_kerr        delta_omega^2 / (2 g^2), scale of the small-field Kerr regime
    scaled_drive  2 eps_d / g, drive measured against the vacuum splitting
    n_wc_tilde    |gamma/2 + i delta_omega|^2 / (2 g^2), detuned saturation scale

    Entries that divide by g are None when g = 0.
    """

    n_sc: float
    n_wc: float | None
    n_kerr: float | None
    scaled_drive: float | None
    n_wc_tilde: float | None


def from_config(cfg) -> SystemParams:
    """Build SystemParams from a ratio-style mapping, kappa = 1 units.

    Expected keys: g_over_kappa, eps_over_g, delta_over_g,
    gamma_over_kappa, n_max. Unknown keys raise ParameterError so typos
    in scenario files fail loudly instead of silently using defaults.
    """
    unknown = set(cfg) - set(_CONFIG_KEYS)
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    missing = set(_CONFIG_KEYS) - set(cfg)
    if missing:
        raise ParameterError(f"missing config keys: {sorted(missing)}")
    g = float(cfg["g_over_kappa"])
    return SystemParams(
        g=g,
        kappa=1.0,
        gamma=float(cfg["gamma_over_kappa"]),
        delta_omega=float(cfg["delta_over_g"]) * g,
        eps_d=float(cfg["eps_over_g"]) * g,
        n_max=int(cfg["n_max"]),
    )


def derived_scales(params: SystemParams) -> ScaleSet:
    """Compute the dimensionless scale set; g = 0 leaves most entries None."""
    g, k = params.g, params.kappa
    n_sc = g * g / (4.0 * k * k)
    if g == 0.0:
        return ScaleSet(n_sc=n_sc, n_wc=None, n_kerr=None,
                        scaled_drive=None, n_wc_tilde=None)
    gg2 = 2.0 * g * g
    return ScaleSet(
        n_sc=n_sc,
        n_wc=params.gamma ** 2 / (4.0 * gg2),
        n_kerr=params.delta_omega ** 2 / gg2,
        scaled_drive=2.0 * params.eps_d / g,
        n_wc_tilde=(params.gamma ** 2 / 4.0 + params.delta_omega ** 2) / gg2,
    )
