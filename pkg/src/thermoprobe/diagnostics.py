"""Non-Gaussianity witnesses and phase-space diagnostics.

Quadrature moments are taken in the x = (a + a†)/√2 convention (vacuum
variance 1/2). Kurtosis K = m₄/m₂² equals 3 for every Gaussian state;
skewness γ₁ = m₃/m₂^{3/2} vanishes for all the probe families here, so K
is the witness that actually discriminates. Trajectory diagnostics evolve
in the interaction picture and rotate each sample back to the lab frame,
where the x-marginal of a rotating non-Gaussian state shows the revivals.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, GridError
from .fock import (
    DensityMatrix,
    FockSpace,
    State,
    as_density_matrix,
    expectation,
    number_phase_rotation,
)
from .gaussian import BathSpec, GaussianState
from .lindblad import evolve, single_mode_generator
from .probes import ProbeSpec, prepare

CUTOFF_CHECK_MARGIN = 10
CUTOFF_CHECK_RTOL = 1e-4


@dataclass(frozen=True)
class QuadratureMoments:
    """Mean and central moments m₂..m₄ of the x quadrature."""

    mean: float
    m2: float
    m3: float
    m4: float


def _moments_on_space(rho: np.ndarray, space: FockSpace) -> QuadratureMoments:
    x, _ = space.quadratures()
    state = DensityMatrix(space, rho)
    mean = float(np.real(expectation(state, x)))
    centered = x - mean * np.eye(space.dim)
    squared = centered @ centered
    m2 = float(np.real(expectation(state, squared)))
    m3 = float(np.real(expectation(state, squared @ centered)))
    m4 = float(np.real(expectation(state, squared @ squared)))
    return QuadratureMoments(mean=mean, m2=m2, m3=m3, m4=m4)


def quadrature_moments(state: State, check_cutoff: bool = True) -> QuadratureMoments:
    """Central x-quadrature moments of a single-mode state.

    With check_cutoff the fourth moment is recomputed on a space enlarged
    by 10 levels; a relative shift above 1e-4 warns that the truncation is
    biasing the moments.
    """
    rho = as_density_matrix(state)
    if rho.space.modes != 1:
        raise DimensionMismatchError("quadrature diagnostics are single mode")
    moments = _moments_on_space(rho.data, rho.space)
    if check_cutoff:
        bigger = FockSpace(rho.space.cutoff + CUTOFF_CHECK_MARGIN, 1)
        padded = np.zeros((bigger.dim, bigger.dim), dtype=complex)
        padded[: rho.space.dim, : rho.space.dim] = rho.data
        grown = _moments_on_space(padded, bigger)
        if abs(grown.m4 - moments.m4) > CUTOFF_CHECK_RTOL * max(abs(grown.m4), 1e-300):
            warnings.warn(
                f"<x^4> shifts by {abs(grown.m4 - moments.m4):.2e} when the cutoff "
                f"grows by {CUTOFF_CHECK_MARGIN}; raise the cutoff",
                stacklevel=2,
            )
        return grown if abs(grown.m4 - moments.m4) > 0 else moments
    return moments


def kurtosis(state: State) -> float:
    """K = m₄/m₂²; 3 for Gaussian statistics."""
    m = quadrature_moments(state, check_cutoff=False)
    if m.m2 <= 1e-12:
        raise ArithmeticError("degenerate quadrature variance")
    return m.m4 / m.m2**2


def skewness(state: State) -> float:
    """γ₁ = m₃/m₂^{3/2}; zero for symmetric distributions."""
    m = quadrature_moments(state, check_cutoff=False)
    if m.m2 <= 1e-12:
        raise ArithmeticError("degenerate quadrature variance")
    return m.m3 / m.m2**1.5


@dataclass(frozen=True)
class DiagnosticCurve:
    """Kurtosis and skewness sampled along a thermalisation trajectory."""

    times: np.ndarray
    kurtosis: np.ndarray
    skewness: np.ndarray
    label: str = ""

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("t,kurtosis,skewness\n")
        for t, k, g in zip(self.times, self.kurtosis, self.skewness):
            out.write(f"{t:.12g},{k:.12g},{g:.12g}\n")
        return out.getvalue()


def kurtosis_trajectory(
    probe: ProbeSpec,
    bath: BathSpec,
    t_grid,
    *,
    cutoff: int = 60,
    prep_tail_tol: float = 1e-6,
    evolve_tail_tol: float = 1e-5,
) -> DiagnosticCurve:
    """K(t) and γ₁(t) of a single-mode probe thermalising in the bath.

    Integration runs without the free Hamiltonian (exact interaction
    picture); each sample is rotated back by exp(-iωt n̂) before taking
    the x-marginal, so the returned curves are lab-frame quantities.
    """
    space = FockSpace(cutoff, 1)
    state0 = prepare(space, probe, tail_tol=prep_tail_tol)
    rho0 = as_density_matrix(state0)
    generator = single_mode_generator(space, bath, include_hamiltonian=False)
    times = np.asarray(t_grid, dtype=float)
    trajectory = evolve(rho0, generator, times, tail_tol=evolve_tail_tol)
    ks, gs = [], []
    for t, state in zip(times, trajectory.states):
        lab = number_phase_rotation(state, bath.omega * t)
        moments = quadrature_moments(lab, check_cutoff=False)
        ks.append(moments.m4 / moments.m2**2)
        gs.append(moments.m3 / moments.m2**1.5)
    return DiagnosticCurve(
        times=times,
        kurtosis=np.array(ks),
        skewness=np.array(gs),
        label=probe.family,
    )


def photon_variance(state: State) -> float:
    """Var n̂ = <n̂²> - <n̂>², from the number-basis populations."""
    weights = state.space.number_weights()
    populations = state.populations()
    mean = float(weights @ populations)
    return float(weights**2 @ populations) - mean**2


def wigner_gaussian(state: GaussianState, xs, ps) -> np.ndarray:
    """Wigner function of a Gaussian state on a rectangular grid.

    W[i, j] = W(xs[i], ps[j]) = exp(-δᵀ σ⁻¹ δ) / (π √det σ) in the
    vacuum-=-identity covariance convention (vacuum peak 1/π). The grid
    must resolve and cover the state: the discrete sum times the cell
    area has to reproduce unit normalisation within 1e-3.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if xs.size < 2 or ps.size < 2:
        raise GridError("need at least a 2x2 grid")
    inv = np.linalg.inv(state.cov)
    dx = xs[:, None] - state.mean[0]
    dp = ps[None, :] - state.mean[1]
    quad = inv[0, 0] * dx**2 + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    w = np.exp(-quad) / (np.pi * np.sqrt(np.linalg.det(state.cov)))
    cell = (xs[1] - xs[0]) * (ps[1] - ps[0])
    total = float(w.sum() * cell)
    if abs(total - 1.0) > 1e-3:
        raise GridError(f"grid integrates Wigner mass to {total:.6f}, not 1")
    return w
