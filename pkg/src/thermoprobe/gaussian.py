"""Single-mode Gaussian formalism: thermal damping channel and Gaussian QFI.

Covariance matrices use the "vacuum = identity" normalisation, so a thermal
state has σ = ν I with ν = coth(ω/2T) = 2 n̄ + 1. A squeezed vacuum with
squeezing parameter r is written here as σ = diag(e^{2r}, e^{-2r}); the
Fock-side squeeze operator S(r) squeezes x instead, which swaps the axes
but changes no Fisher quantity (the formulas are symmetric under x <-> p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PureStateError

PURE_DET_GUARD = 1e-12


@dataclass(frozen=True)
class BathSpec:
    """Thermal bath: mode frequency, temperature, damping rate (ħ = k_B = 1)."""

    omega: float
    temperature: float
    gamma: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    @property
    def nbar(self) -> float:
        """Bose-Einstein occupancy (e^{ω/T} - 1)^{-1}."""
        x = self.omega / self.temperature
        return 0.0 if x > 700.0 else 1.0 / np.expm1(x)

    @property
    def nbar_slope(self) -> float:
        """d n̄ / dT = (ω/T²) n̄ (n̄ + 1); positive for T > 0."""
        n = self.nbar
        return (self.omega / self.temperature**2) * n * (n + 1.0)

    @property
    def nu(self) -> float:
        return 1.0 / np.tanh(self.omega / (2.0 * self.temperature))

    @property
    def nu_slope(self) -> float:
        half = self.omega / (2.0 * self.temperature)
        if half > 350.0:
            return 0.0
        return (self.omega / (2.0 * self.temperature**2)) / np.sinh(half) ** 2


def thermal_nu(bath: BathSpec) -> tuple[float, float]:
    """(ν, dν/dT) of the bath; ν = 2 n̄ + 1."""
    return bath.nu, bath.nu_slope


@dataclass(frozen=True)
class GaussianState:
    """First moments (x, p) and 2x2 covariance matrix, vacuum = identity."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if abs(cov[0, 1] - cov[1, 0]) > 1e-10:
            raise ValueError("covariance matrix must be symmetric")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.cov))

    @property
    def purity(self) -> float:
        return 1.0 / np.sqrt(self.det)

    def is_physical(self, slack: float = 1e-9) -> bool:
        return self.det >= 1.0 - slack

    @staticmethod
    def vacuum() -> "GaussianState":
        return GaussianState(np.zeros(2), np.eye(2))

    @staticmethod
    def thermal(nu: float) -> "GaussianState":
        return GaussianState(np.zeros(2), nu * np.eye(2))

    @staticmethod
    def squeezed_vacuum(r: float) -> "GaussianState":
        return GaussianState(np.zeros(2), np.diag([np.exp(2 * r), np.exp(-2 * r)]))

    @staticmethod
    def coherent(alpha: complex) -> "GaussianState":
        mean = np.sqrt(2.0) * np.array([np.real(alpha), np.imag(alpha)])
        return GaussianState(mean, np.eye(2))

    @staticmethod
    def squeezed_thermal(r: float, nbar: float) -> "GaussianState":
        nu0 = 2.0 * nbar + 1.0
        return GaussianState(np.zeros(2), nu0 * np.diag([np.exp(2 * r), np.exp(-2 * r)]))


def evolve_cm(state: GaussianState, bath: BathSpec, t: float,
              rotation: np.ndarray | None = None) -> GaussianState:
    """Thermal damping channel on the covariance matrix.

    σ_t = e^{-γt} O σ₀ Oᵀ + (1 - e^{-γt}) ν I and d_t = e^{-γt/2} O d₀,
    with the rotation O defaulting to the identity (interaction picture).
    """
    decay = np.exp(-bath.gamma * t)
    rot = np.eye(2) if rotation is None else np.asarray(rotation, dtype=float)
    cov = decay * (rot @ state.cov @ rot.T) + (1.0 - decay) * bath.nu * np.eye(2)
    mean = np.sqrt(decay) * (rot @ state.mean)
    return GaussianState(mean, cov)


def gaussian_qfi(state: GaussianState, dcov: np.ndarray,
                 dpurity: float | None = None,
                 dmean: np.ndarray | None = None) -> float:
    """Temperature QFI of a single-mode Gaussian state.

    F = Tr[(σ^{-1} σ')²] / (2(1 + μ²)) + 2 μ'² / (1 - μ⁴) + d'ᵀ σ^{-1} d'
    with purity μ = det σ^{-1/2}. When dpurity is omitted it is derived
    from dcov via μ' = -μ Tr(σ^{-1} σ') / 2. The mean of the damping
    channel carries no temperature dependence, so dmean defaults to zero.

    Raises PureStateError for det σ <= 1 + 1e-12, where the second term is
    singular; at t = 0 the transient QFI is defined as exactly zero by the
    callers instead of being evaluated here.
    """
    cov = state.cov
    det = float(np.linalg.det(cov))
    if det <= 1.0 + PURE_DET_GUARD:
        raise PureStateError(f"det σ = {det} is at the pure-state singularity")
    dcov = np.asarray(dcov, dtype=float).reshape(2, 2)
    inv = np.linalg.inv(cov)
    ratio = inv @ dcov
    mu = 1.0 / np.sqrt(det)
    if dpurity is None:
        dpurity = -0.5 * mu * float(np.trace(ratio))
    value = float(np.trace(ratio @ ratio)) / (2.0 * (1.0 + mu**2))
    value += 2.0 * dpurity**2 / (1.0 - mu**4)
    if dmean is not None:
        dmean = np.asarray(dmean, dtype=float).reshape(2)
        value += float(dmean @ inv @ dmean)
    return value


def evolved_cm_qfi(state0: GaussianState, bath: BathSpec, t: float) -> float:
    """QFI of any Gaussian probe after time t in the damping channel.

    Only the injected thermal noise depends on T, so
    dσ_t/dT = (1 - e^{-γt}) ν' I exactly (no finite differences).
    """
    if t == 0.0:
        return 0.0
    evolved = evolve_cm(state0, bath, t)
    dcov = (1.0 - np.exp(-bath.gamma * t)) * bath.nu_slope * np.eye(2)
    return gaussian_qfi(evolved, dcov)


def svs_qfi_evolved(r: float, bath: BathSpec, t: float) -> float:
    """Closed-form QFI of an evolved squeezed vacuum (squeezing parameter r).

    F = (1-e^{-γt})² ν'² (A² + B² + 2) / (2 ((AB)² - 1)) with
    A = e^{-γt} e^{2r} + (1-e^{-γt}) ν and B its e^{-2r} partner. Equals
    gaussian_qfi on the evolved covariance matrix; 0 at t = 0.
    """
    if t == 0.0:
        return 0.0
    decay = np.exp(-bath.gamma * t)
    nu, dnu = bath.nu, bath.nu_slope
    a = decay * np.exp(2 * r) + (1 - decay) * nu
    b = decay * np.exp(-2 * r) + (1 - decay) * nu
    return (1 - decay) ** 2 * dnu**2 / 2.0 * (a * a + b * b + 2.0) / ((a * b) ** 2 - 1.0)


def svs_qfi_short_time(n_sv: float, bath: BathSpec, t: float) -> float:
    """Leading short-time law for the squeezed vacuum, linear in t.

    F ≈ (γt/2) ν'² (2 n_sv + 1)² / (ν (2 n_sv + 1) - 1) with
    n_sv = sinh² r the probe photon number. Valid for γt << 1.
    """
    nu, dnu = bath.nu, bath.nu_slope
    u = 2.0 * n_sv + 1.0
    return 0.5 * bath.gamma * t * dnu**2 * u * u / (nu * u - 1.0)


def thermal_qfi(omega: float, temperature: float) -> float:
    """Equilibrium thermal-state QFI ω² csch²(ω/2T) / (4T⁴)."""
    half = omega / (2.0 * temperature)
    return omega**2 / (4.0 * temperature**4) / np.sinh(half) ** 2
