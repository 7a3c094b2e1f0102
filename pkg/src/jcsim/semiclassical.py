"""Mean-field theory of the driven oscillator: every closed-form law.

All steady photon numbers u = |alpha_ss|^2 are found the same way:
write the law as a scalar fixed point u = rhs(u), bracket sign changes
of u - rhs(u) on a dense log-spaced grid, then polish each bracket by
bisection. rhs involves square roots of u, so derivative-free and total
beats Newton here.

The amplitude-form law uses sgn(delta_omega) and is undefined on
resonance; resonance has its own pair of functions (above_threshold,
bloch_below_threshold) and callers are routed there explicitly.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import (AboveThreshold, BelowThreshold, CouplingTooWeak, NoRoot,
                     ParameterError, ResonanceSingular)
from .observables import BlochVector
from .params import SystemParams, derived_scales

_GRID_POINTS = 10_000
_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class BranchCurve:
    """Roots of a mean-field law swept along one control ratio.

    points holds (control value, ascending roots) pairs; the root count
    is 1, 2 or 3 everywhere by the cubic-like structure of the laws.
    """

    control: str
    points: list
    params_snapshot: SystemParams


@dataclass(frozen=True)
class ThresholdStates:
    """Symmetry-broken pair of resonant field amplitudes above threshold.

    degenerate marks the critical point itself, where both amplitudes
    merge at zero and the angles are only defined as limits.
    small_angle is set once 2 eps_d / g > 10, where theta ~ g/(2 eps_d).
    """

    alpha_plus: complex
    alpha_minus: complex
    theta_plus: float
    theta_minus: float
    amp2: float
    degenerate: bool = False
    small_angle: bool = False

    def __post_init__(self):
        if abs(self.alpha_minus - np.conj(self.alpha_plus)) > 1e-12 * (1 + abs(self.alpha_plus)):
            raise ParameterError("amplitudes must be complex conjugates")
        if abs(self.theta_plus) > np.pi / 2 or abs(self.theta_minus) > np.pi / 2:
            raise ParameterError("angles must lie within [-pi/2, pi/2]")


@dataclass(frozen=True)
class KerrEffective:
    delta_bar: float
    bistable: bool
    vac_rabi_amp2: float | None
    vac_rabi_valid: bool


@dataclass(frozen=True)
class AsymptoticRoots:
    amp2_plus: float
    amp2_minus: float
    valid_plus: bool
    valid_minus: bool


def _fixed_point_roots(rhs, upper, lower=1e-12):
    """All nonnegative u with u = rhs(u), by bracketing + bisection."""
    grid = np.geomspace(lower, upper, _GRID_POINTS)
    res = grid - rhs(grid)
    roots = []
    sign = np.sign(res)
    for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        u = brentq(lambda t: t - rhs(np.asarray(t)), grid[k], grid[k + 1],
                   xtol=1e-300, rtol=8.9e-16)
        if not roots or abs(u - roots[-1]) > 1e-9 * max(u, 1.0):
            roots.append(float(u))
    for k in np.nonzero(res == 0.0)[0]:
        u = float(grid[k])
        if all(abs(u - r) > 1e-9 * max(u, 1.0) for r in roots):
            roots.append(u)
    roots.sort()
    for u in roots:
        rel = abs(u - float(rhs(np.asarray(u)))) / max(u, 1e-30)
        if rel > _RESIDUAL_RTOL:
            raise NoRoot(f"root {u:.6e} fails its residual check: {rel:.3e}")
    return roots


def neoclassical_roots(params: SystemParams) -> list[float]:
    """Steady |alpha_ss|^2 of the amplitude-form mean-field law.

    u = (eps_d/kappa)^2 / (1 + [(dw - sgn(dw) g^2 / sqrt(dw^2 + 4 g^2 u)) / kappa]^2)

    Between one and three roots, ascending. Requires detuning.
    """
    dw, g, k, eps = params.delta_omega, params.g, params.kappa, params.eps_d
    if dw == 0.0:
        raise ResonanceSingular(
            "amplitude-form law undefined on resonance; "
            "use above_threshold / bloch_below_threshold")
    if eps == 0.0:
        return [0.0]
    drive2 = (eps / k) ** 2

    def rhs(u):
        shift = dw - np.sign(dw) * g * g / np.sqrt(dw * dw + 4.0 * g * g * u)
        return drive2 / (1.0 + (shift / k) ** 2)

    upper = 10.0 * drive2 + 10.0 * derived_scales(params).n_sc + 1e-9
    roots = _fixed_point_roots(rhs, upper, lower=min(1e-12, 0.1 * drive2))
    assert roots, "drive is nonzero, a root must exist"
    return roots


def spontaneous_roots(params: SystemParams) -> list[float]:
    """Steady |alpha_ss|^2 with atomic decay folded into the mean field.

    u = (eps_d/kappa)^2 |h(u)|^2 with
    h = 1 / (1 - i dw/kappa + [g^2 gt / (kappa |gt|^2)] / (1 + u/nt)),
    gt = gamma/2 + i dw and nt = |gt|^2 / (2 g^2). |h| <= 1 always,
    so every root sits below the empty-cavity response.
    """
    dw, g, k, eps = params.delta_omega, params.g, params.kappa, params.eps_d
    if eps == 0.0:
        return [0.0]
    drive2 = (eps / k) ** 2
    gt = 0.5 * params.gamma + 1j * dw
    if g == 0.0:
        return [drive2 / (1.0 + (dw / k) ** 2)]
    if gt == 0.0:
        # gamma = 0 on resonance: the coupling term diverges and h -> 0
        return [0.0]
    nt = abs(gt) ** 2 / (2.0 * g * g)
    coupling = g * g * gt / (k * abs(gt) ** 2)

    def rhs(u):
        h = 1.0 / (1.0 - 1j * dw / k + coupling / (1.0 + u / nt))
        return drive2 * np.abs(h) ** 2

    upper = 10.0 * drive2 + 10.0 * derived_scales(params).n_sc + 1e-9
    roots = _fixed_point_roots(rhs, upper, lower=min(1e-12, 0.1 * drive2))
    return roots if roots else [0.0]


def stability_labels(roots) -> list[str]:
    """S-curve convention: outer branches stable, middle one unstable.

    A label, not a linear-stability analysis.
    """
    if len(roots) == 3:
        return ["stable", "unstable", "stable"]
    return ["stable"] * len(roots)


def kerr_effective(params: SystemParams) -> KerrEffective:
    """Map the detuned oscillator onto an effective Kerr oscillator.

    delta_bar = dw - g^2/dw. Bistable when delta_bar^2 > 3 kappa^2 and
    the effective detuning opposes the nonlinearity g^4/dw^3.
    vac_rabi_amp2 = [eps_d/(2g)]^(2/3) estimates the response at the
    vacuum Rabi resonance, trusted only for eps_d/(2g) < 0.1.
    """
    dw, g, k = params.delta_omega, params.g, params.kappa
    if dw == 0.0:
        raise ResonanceSingular("Kerr mapping needs nonzero detuning")
    delta_bar = dw - g * g / dw
    bistable = (delta_bar ** 2 > 3.0 * k * k) and (delta_bar * g ** 4 / dw ** 3 < 0.0)
    if g > 0.0:
        ratio = params.eps_d / (2.0 * g)
        amp2 = ratio ** (2.0 / 3.0)
        valid = ratio < 0.1
    else:
        amp2, valid = None, False
    return KerrEffective(delta_bar=float(delta_bar), bistable=bool(bistable),
                         vac_rabi_amp2=amp2, vac_rabi_valid=valid)


def bistability_onset_detuning(params: SystemParams) -> float:
    """Detuning ratio where bistability first appears, {[1+(1-sqrt(3)k/g)^2]/2}^(1/2).

    Defined down to g = sqrt(3) kappa inclusive; weaker coupling cannot
    go bistable at any detuning.
    """
    g, k = params.g, params.kappa
    if g < np.sqrt(3.0) * k:
        raise CouplingTooWeak(
            f"need g >= sqrt(3) kappa, got g/kappa = {g / k:.4f}")
    return float(np.sqrt(0.5 * (1.0 + (1.0 - np.sqrt(3.0) * k / g) ** 2)))


def offset_detuning(params: SystemParams) -> tuple[float, float]:
    """Detuning ratios (+,-) where the response equals the empty-cavity peak.

    (dw/g)^2 = 2 (eps_d/kappa)^2 (sqrt(1 + (kappa/eps_d)^4 / 4) - 1).
    Tends to ±1 for weak drive and to ±kappa/(2 eps_d) for strong.
    """
    eps, k = params.eps_d, params.kappa
    if eps <= 0.0:
        raise ParameterError("offset detuning needs eps_d > 0")
    # sqrt(1+y)-1 written as y/(sqrt(1+y)+1): for strong drive y ~ (k/eps)^4
    # underflows against the leading 1 and the direct form loses every digit
    y = 0.25 * (k / eps) ** 4
    val2 = 2.0 * (eps / k) ** 2 * y / (np.sqrt(1.0 + y) + 1.0)
    v = float(np.sqrt(val2))
    return v, -v


def asymptotic_roots(params: SystemParams) -> AsymptoticRoots:
    """Outer mean-field roots in the negligible-loss limit, [(g ± 2 eps_d)/(2 dw)]^2.

    Each validity flag requires 4 g^2 u > 10 dw^2, the regime where the
    expansion that produced the formula holds.
    """
    dw, g, eps = params.delta_omega, params.g, params.eps_d
    if dw == 0.0:
        raise ResonanceSingular("asymptotic roots are a detuned-limit form")
    plus = ((g + 2.0 * eps) / (2.0 * dw)) ** 2
    minus = ((g - 2.0 * eps) / (2.0 * dw)) ** 2
    return AsymptoticRoots(
        amp2_plus=float(plus), amp2_minus=float(minus),
        valid_plus=bool(4.0 * g * g * plus > 10.0 * dw * dw),
        valid_minus=bool(4.0 * g * g * minus > 10.0 * dw * dw),
    )


def anharmonic_n(params: SystemParams) -> float:
    """Continuous-variable photon number of the square-root-ladder oscillator.

    Largest positive root of
        n + (g/kappa)^2 [1 - n (4 n^2 + 1)^(-1/2)]^2 = (eps_d/kappa)^2
    on [0, (eps_d/kappa)^2]. For weak drive (roughly eps_d below g/2)
    the left side never dips down to the right side and there is no
    solution; NoRoot then.
    """
    g, k, eps = params.g, params.kappa, params.eps_d
    drive2 = (eps / k) ** 2
    if g == 0.0:
        return float(drive2)
    if eps == 0.0:
        raise NoRoot("zero drive: relation has no positive solution")

    def residual(n):
        return n + (g / k) ** 2 * (1.0 - n / np.sqrt(4.0 * n * n + 1.0)) ** 2 - drive2

    grid = np.linspace(0.0, drive2, 8192)
    res = residual(grid)
    sign = np.sign(res)
    crossings = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(crossings) == 0:
        raise NoRoot("drive too weak: ladder relation has no positive root")
    k_last = crossings[-1]
    root = brentq(residual, grid[k_last], grid[k_last + 1],
                  xtol=1e-300, rtol=8.9e-16)
    assert abs(residual(root)) < 1e-10 * max(drive2, 1e-30)
    return float(root)


def above_threshold(params: SystemParams) -> ThresholdStates:
    """Symmetry-broken resonant amplitudes for eps_d >= g/2.

    alpha_ss = (eps_d/kappa)(1 - s^2) ± i (g/(2 kappa)) sqrt(1 - s^2)
    with s = g/(2 eps_d); the modulus obeys
    |alpha_ss|^2 = n_sc [(2 eps_d/g)^2 - 1] and the tilt angle is
    theta = ± arctan{[(2 eps_d/g)^2 - 1]^(-1/2)}. At the critical point
    both states collapse onto zero and theta is reported as the limit
    pi/2 with the degenerate flag set.
    """
    g, k, eps = params.g, params.kappa, params.eps_d
    if params.delta_omega != 0.0:
        raise ParameterError("resonant form: delta_omega must be 0")
    if g == 0.0:
        amp = eps / k
        return ThresholdStates(alpha_plus=complex(amp), alpha_minus=complex(amp),
                               theta_plus=0.0, theta_minus=0.0,
                               amp2=amp * amp, small_angle=True)
    if eps < 0.5 * g:
        raise BelowThreshold(
            f"eps_d/g = {eps / g:.4f} < 1/2: mean-field amplitude is zero")
    s = g / (2.0 * eps)
    re = (eps / k) * (1.0 - s * s)
    im = (g / (2.0 * k)) * np.sqrt(1.0 - s * s)
    drive_ratio2 = (2.0 * eps / g) ** 2
    amp2 = (g * g / (4.0 * k * k)) * (drive_ratio2 - 1.0)
    if eps == 0.5 * g:
        theta = np.pi / 2
        degenerate = True
    else:
        theta = float(np.arctan(1.0 / np.sqrt(drive_ratio2 - 1.0)))
        degenerate = False
    return ThresholdStates(
        alpha_plus=complex(re, im), alpha_minus=complex(re, -im),
        theta_plus=theta, theta_minus=-theta, amp2=float(amp2),
        degenerate=degenerate, small_angle=bool(2.0 * eps / g > 10.0))


def bloch_below_threshold(eps_over_g: float) -> BlochVector:
    """Mean-field Bloch vector on resonance below threshold; unit norm.

    X = -2 eps_d/g, Y = 0, Z = -sqrt(1 - (2 eps_d/g)^2).
    """
    if eps_over_g < 0.0:
        raise ParameterError("drive ratio must be >= 0")
    if eps_over_g > 0.5:
        raise AboveThreshold(
            f"eps_d/g = {eps_over_g:.4f} > 1/2: polarization leaves this branch")
    x = -2.0 * eps_over_g
    return BlochVector(x=x, y=0.0, z=-float(np.sqrt(1.0 - x * x)))


def weak_drive_photon(params: SystemParams) -> float:
    """Leading-order resonant photon number 2 (eps_d/g)^4.

    Perturbative in eps_d/g; trust it below about 0.15.
    """
    if params.g == 0.0:
        raise ParameterError("needs g > 0")
    return float(2.0 * (params.eps_d / params.g) ** 4)


def steady_amplitudes(params: SystemParams) -> list[float]:
    """Mean-field |alpha_ss|^2 for any parameter point, dispatching between laws."""
    if params.gamma > 0.0:
        return spontaneous_roots(params)
    if params.delta_omega != 0.0:
        return neoclassical_roots(params)
    if params.eps_d <= 0.5 * params.g or params.g == 0.0:
        base = [0.0]
        if params.g == 0.0 and params.eps_d > 0.0:
            base = [(params.eps_d / params.kappa) ** 2]
        return base
    return [above_threshold(params).amp2]


def branch_curve(params: SystemParams, control: str, values) -> BranchCurve:
    """Sweep one control ratio, collecting ascending root lists."""
    if control not in ("eps_over_g", "delta_over_g"):
        raise ParameterError(f"unknown control {control!r}")
    points = []
    for v in values:
        if control == "eps_over_g":
            p = replace(params, eps_d=float(v) * params.g)
        else:
            p = replace(params, delta_omega=float(v) * params.g)
        roots = steady_amplitudes(p)
        if not 1 <= len(roots) <= 3:
            raise NoRoot(f"{len(roots)} roots at {control}={v}; law is cubic-like")
        points.append((float(v), roots))
    return BranchCurve(control=control, points=points, params_snapshot=params)


def serialize_branch_curve(curve: BranchCurve) -> str:
    """Rows: control value, root count, ascending roots, stability labels."""
    lines = [f"# control: {curve.control}"]
    for v, roots in curve.points:
        cells = [format(v, ".9g"), str(len(roots))]
        cells.extend(format(r, ".9g") for r in roots)
        cells.extend(stability_labels(roots))
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"
