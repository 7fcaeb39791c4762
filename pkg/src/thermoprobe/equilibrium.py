"""Closed-form equilibrium thermometry for squeezed thermal probes.

The two-mode squeezing Hamiltonian diagonalises into normal modes at
ω̃± = ω ± r (Bogoliubov transformation); in a global Gibbs state each
normal mode is thermally occupied at its own frequency. Every classical
Fisher information here is the Gaussian scalar form
(∂_T μ)²/σ² + (∂_T σ²)²/(2σ⁴) applied to a specific observable:

* photon number of a single squeezed thermal mode;
* a two-mode quadrature (mean zero, variance channel only);
* total energy, whose CFI is the optimal C(T)/T²;
* the normal-mode population difference, near-optimal under squeezing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, SoftModeError

SOFT_MODE_RATIO = 1e-3


def _bose(freq: float, temperature: float) -> float:
    x = freq / temperature
    return 0.0 if x > 700.0 else 1.0 / np.expm1(x)


def _bose_slope(freq: float, temperature: float) -> float:
    n = _bose(freq, temperature)
    return (freq / temperature**2) * n * (n + 1.0)


def _coth(x: float) -> float:
    return 1.0 / np.tanh(x)


def _coth_slope(freq: float, temperature: float) -> float:
    # d/dT coth(freq / 2T)
    half = freq / (2.0 * temperature)
    if half > 350.0:
        return 0.0
    return (freq / (2.0 * temperature**2)) / np.sinh(half) ** 2


def _check_stability(omega: float, r: float) -> None:
    if r < 0:
        raise InstabilityError("squeezing r must be nonnegative")
    if r >= omega:
        raise InstabilityError(
            f"r = {r} >= omega = {omega}: soft normal mode, Gibbs state undefined"
        )


@dataclass(frozen=True)
class NormalModes:
    """Bogoliubov normal modes ω̃± = ω ± r with their thermal occupancies."""

    omega_plus: float
    omega_minus: float
    n_plus: float
    n_minus: float
    temperature: float


def normal_modes(omega: float, r: float, temperature: float) -> NormalModes:
    """Diagonalise and occupy the two-mode squeezed system at temperature T.

    Raises InstabilityError for r >= ω and SoftModeError when the lower
    normal-mode frequency is so small against T that its occupancy
    diverges (ω̃₋/T below 1e-3).
    """
    _check_stability(omega, r)
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    w_plus, w_minus = omega + r, omega - r
    if w_minus / temperature < SOFT_MODE_RATIO:
        raise SoftModeError(
            f"omega_minus/T = {w_minus / temperature:.2e}: occupancy diverging"
        )
    return NormalModes(
        omega_plus=w_plus,
        omega_minus=w_minus,
        n_plus=_bose(w_plus, temperature),
        n_minus=_bose(w_minus, temperature),
        temperature=temperature,
    )


@dataclass(frozen=True)
class SqueezedThermalMoments:
    """Photon-number mean and variance of a squeezed thermal mode."""

    mean: float
    variance: float


def squeezed_thermal_moments(r: float, nbar: float) -> SqueezedThermalMoments:
    """<n> = sinh²r + cosh(2r) n̄;  Var n = sinh²r(sinh²r+1) + cosh²(2r) n̄(n̄+1).

    At r = 0 this reduces to the thermal pair (n̄, n̄(n̄+1)); the variance
    grows like e^{4r}/16 at large squeezing, which is what ruins photon
    counting as a thermometer for strongly squeezed single modes.
    """
    if r < 0 or nbar < 0:
        raise ValueError("r and nbar must be nonnegative")
    sh2 = np.sinh(r) ** 2
    ch2r = np.cosh(2.0 * r)
    mean = sh2 + ch2r * nbar
    variance = sh2 * (sh2 + 1.0) + ch2r**2 * nbar * (nbar + 1.0)
    return SqueezedThermalMoments(mean=float(mean), variance=float(variance))


def gaussian_scalar_cfi(mean: float, mean_slope: float,
                        variance: float, variance_slope: float) -> float:
    """CFI of a Gaussian observable: (∂_T μ)²/σ² + (∂_T σ²)²/(2σ⁴).

    Pass a zero slope to select a single channel; the mean value itself
    only matters through its slope.
    """
    if variance <= 0:
        raise ValueError("variance must be positive")
    del mean  # only the slope enters
    return mean_slope**2 / variance + variance_slope**2 / (2.0 * variance**2)


def cfi_photon_number_single(r: float, omega: float, temperature: float,
                             printed_prefactor: bool = False) -> float:
    """CFI of photon counting on a single-mode squeezed thermal state.

    Canonical form (∂_T <n>)² / Var n. ``printed_prefactor`` selects a
    1/8-scaled variant kept only for curve-shape comparison; peak
    positions and orderings are identical.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    nbar = _bose(omega, temperature)
    moments = squeezed_thermal_moments(r, nbar)
    mean_slope = np.cosh(2.0 * r) * _bose_slope(omega, temperature)
    value = gaussian_scalar_cfi(moments.mean, mean_slope, moments.variance, 0.0)
    return value / 8.0 if printed_prefactor else value


def cfi_quadrature_single(omega: float, temperature: float) -> float:
    """CFI of an x-quadrature measurement on a squeezed thermal mode.

    2ω² e^{2ω/T} / (T⁴ (e^{ω/T}-1)² (1+e^{ω/T})²); the squeezing factor
    e^{-2r} cancels between (∂_T σ²)² and σ⁴, so the result carries no r.
    Identical to the variance-channel CFI of σ² ∝ coth(ω/2T).
    """
    x = omega / temperature
    if x > 350.0:
        return 0.0
    expx = np.exp(x)
    return (
        2.0 * omega**2 * expx**2
        / (temperature**4 * np.expm1(x) ** 2 * (1.0 + expx) ** 2)
    )


def cfi_quadrature_two(omega: float, r: float, temperature: float,
                       theta: float = 0.0, phi: float = 0.0) -> float:
    """CFI of the collective quadrature X_θ on the two-mode Gibbs state.

    X_θ has zero mean and variance |u(θ)|² (coth(ω̃₊/2T) + coth(ω̃₋/2T));
    the |u(θ)|² prefactor cancels in the variance channel, so the value is
    independent of θ and of the pump phase φ.
    """
    _check_stability(omega, r)
    del theta, phi  # cancel exactly; accepted to document the invariance
    w_plus, w_minus = omega + r, omega - r
    total = _coth(w_plus / (2 * temperature)) + _coth(w_minus / (2 * temperature))
    total_slope = _coth_slope(w_plus, temperature) + _coth_slope(w_minus, temperature)
    return 0.5 * (total_slope / total) ** 2


def cfi_quadrature_two_low_temperature(omega: float, r: float, temperature: float) -> float:
    """Low-T asymptote of the two-mode quadrature CFI.

    (ω-r)²/(2T⁴) e^{-2(ω-r)/T}, valid for T << ω - r; grows exponentially
    with squeezing and collapses as r -> ω.
    """
    _check_stability(omega, r)
    gap = omega - r
    x = gap / temperature
    return 0.0 if x > 350.0 else gap**2 / (2.0 * temperature**4) * np.exp(-2.0 * x)


def gibbs_energy_and_heat_capacity(modes: NormalModes, temperature: float | None = None) -> tuple[float, float]:
    """Mean Gibbs energy (vacuum shift dropped) and heat capacity C = d<H>/dT.

    <H> = Σ± ω̃± n̄±;  C = Σ± ω̃±² e^{ω̃±/T} / (T² (e^{ω̃±/T}-1)²).
    """
    T = modes.temperature if temperature is None else temperature
    energy = 0.0
    capacity = 0.0
    for freq in (modes.omega_plus, modes.omega_minus):
        energy += freq * _bose(freq, T)
        capacity += freq * _bose_slope(freq, T)
    return energy, capacity


def cfi_optimal(omega: float, r: float, temperature: float) -> float:
    """Optimal (energy-measurement) CFI, C(T)/T².

    Σ± ω̃±² e^{ω̃±/T} / (T⁴ (e^{ω̃±/T}-1)²); equals the QFI of the Gibbs
    family, i.e. the diagonal Fisher information of the product-Gibbs
    populations.
    """
    _check_stability(omega, r)
    out = 0.0
    for freq in (omega + r, omega - r):
        x = freq / temperature
        if x > 700.0:
            continue
        out += freq**2 * np.exp(x) / (temperature**4 * np.expm1(x) ** 2)
    return out


def cfi_optimal_low_temperature(omega: float, r: float, temperature: float) -> float:
    """Low-T asymptote (ω-r)²/T⁴ e^{-(ω-r)/T} of the optimal CFI."""
    _check_stability(omega, r)
    gap = omega - r
    x = gap / temperature
    return 0.0 if x > 700.0 else gap**2 / temperature**4 * np.exp(-x)


def cfi_population_difference(omega: float, r: float, temperature: float) -> float:
    """CFI of the normal-mode population difference N_+ - N_-.

    (∂_T n̄₊ - ∂_T n̄₋)² / (n̄₊(1+n̄₊) + n̄₋(1+n̄₋)); zero at r = 0 by
    symmetry, near-optimal at strong squeezing and low temperature where
    the soft mode dominates both numerator and variance.
    """
    _check_stability(omega, r)
    w_plus, w_minus = omega + r, omega - r
    n_plus, n_minus = _bose(w_plus, temperature), _bose(w_minus, temperature)
    numerator = (_bose_slope(w_plus, temperature) - _bose_slope(w_minus, temperature)) ** 2
    variance = n_plus * (1 + n_plus) + n_minus * (1 + n_minus)
    if variance == 0.0:
        return 0.0
    return numerator / variance


def product_gibbs_populations(omega: float, r: float, temperature: float,
                              cutoff: int) -> np.ndarray:
    """Joint populations of the product Gibbs state on a truncated grid.

    Flattened (cutoff x cutoff) array over normal-mode numbers (j, k);
    used as the brute-force family for diagonal-Fisher cross-checks.
    """
    _check_stability(omega, r)
    j = np.arange(cutoff)
    p_plus = np.exp(-(omega + r) * j / temperature)
    p_minus = np.exp(-(omega - r) * j / temperature)
    p_plus /= p_plus.sum()
    p_minus /= p_minus.sum()
    return np.outer(p_plus, p_minus).ravel()
