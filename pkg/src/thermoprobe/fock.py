"""Truncated-Fock-space linear algebra.

Conventions used throughout the package:

* photon numbers run over ``0 .. cutoff-1`` per mode, total dimension
  ``cutoff**modes``;
* two-mode basis ordering is row-major, index ``i = n_a * cutoff + n_b``;
* quadratures are ``x = (a + a†)/√2``, ``p = (a - a†)/(i√2)``, so the
  vacuum variance of ``x`` is 1/2;
* covariance matrices extracted here use the doubled ("vacuum = identity")
  normalisation ``σ_ij = <ΔR_i ΔR_j + ΔR_j ΔR_i>`` with ``R = (x, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatchError

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-8
EIGENVALUE_FLOOR = -1e-8


@dataclass(frozen=True)
class FockSpace:
    """A truncated bosonic Hilbert space with 1 or 2 modes."""

    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")
        if self.modes not in (1, 2):
            raise ValueError("only 1- and 2-mode spaces are supported")

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.modes:
            raise DimensionMismatchError(
                f"mode {mode} out of range for {self.modes}-mode space"
            )

    def annihilator(self, mode: int = 0) -> np.ndarray:
        """Dense matrix of a_mode, with a|n> = sqrt(n)|n-1>."""
        self._check_mode(mode)
        a = np.diag(np.sqrt(np.arange(1, self.cutoff, dtype=float)), k=1)
        a = a.astype(complex)
        if self.modes == 1:
            return a
        eye = np.eye(self.cutoff, dtype=complex)
        return np.kron(a, eye) if mode == 0 else np.kron(eye, a)

    def creator(self, mode: int = 0) -> np.ndarray:
        return self.annihilator(mode).conj().T

    def ladder(self, mode: int = 0) -> tuple[np.ndarray, np.ndarray]:
        a = self.annihilator(mode)
        return a, a.conj().T

    def number_weights(self) -> np.ndarray:
        """Diagonal of the total photon-number operator, as a real vector."""
        n = np.arange(self.cutoff, dtype=float)
        if self.modes == 1:
            return n
        return (n[:, None] + n[None, :]).ravel()

    def number_op(self, mode: int | None = None) -> np.ndarray:
        """n̂ for one mode, or the total number operator when mode is None."""
        if mode is None:
            return np.diag(self.number_weights()).astype(complex)
        a = self.annihilator(mode)
        return a.conj().T @ a

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def quadratures(self, mode: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """(x, p) for one mode in the 1/sqrt(2) convention."""
        a, adag = self.ladder(mode)
        x = (a + adag) / np.sqrt(2.0)
        p = (a - adag) / (1j * np.sqrt(2.0))
        return x, p

    def basis_vector(self, *ns: int) -> np.ndarray:
        if len(ns) != self.modes:
            raise DimensionMismatchError("one photon number per mode required")
        idx = 0
        for n in ns:
            if not 0 <= n < self.cutoff:
                raise DimensionMismatchError(f"photon number {n} beyond cutoff")
            idx = idx * self.cutoff + n
        v = np.zeros(self.dim, dtype=complex)
        v[idx] = 1.0
        return v

    def vacuum(self) -> np.ndarray:
        return self.basis_vector(*([0] * self.modes))


@dataclass(frozen=True)
class StateVector:
    """A pure state |ψ> on a FockSpace."""

    space: FockSpace
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.space.dim,):
            raise DimensionMismatchError("state vector length != space dimension")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "StateVector":
        return StateVector(self.space, self.data / self.norm)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.data, other.data))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.data, self.data.conj()))

    def populations(self) -> np.ndarray:
        return np.abs(self.data) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator on a FockSpace (Hermitian, unit trace, ρ ⪰ 0)."""

    space: FockSpace
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError("density matrix shape != space dimension")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    @property
    def purity(self) -> float:
        return float(np.real(np.sum(self.data * self.data.T)))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2)[0])

    def validate(self, check_positivity: bool = True) -> None:
        """Assert the DensityMatrix invariants at the package tolerances."""
        if self.hermiticity_defect() >= HERMITICITY_ATOL:
            raise ValueError(f"hermiticity defect {self.hermiticity_defect():.2e}")
        if abs(self.trace - 1.0) >= TRACE_ATOL:
            raise ValueError(f"trace deviates from 1 by {self.trace - 1.0:.2e}")
        if check_positivity and self.min_eigenvalue() <= EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.2e}")


State = StateVector | DensityMatrix


def as_density_matrix(state: State) -> DensityMatrix:
    return state if isinstance(state, DensityMatrix) else state.density_matrix()


def expectation(state: State, op: np.ndarray) -> complex:
    """<O> for a StateVector or DensityMatrix."""
    if op.shape != (state.space.dim, state.space.dim):
        raise DimensionMismatchError("operator dimension != state space")
    if isinstance(state, StateVector):
        return complex(np.vdot(state.data, op @ state.data))
    return complex(np.trace(state.data @ op))


def matrix_exponential(generator: np.ndarray) -> np.ndarray:
    """Dense expm via scaling-and-squaring; exact for the truncated generator."""
    return expm(generator)


def partial_trace(state: State, keep: int) -> DensityMatrix:
    """Reduced density matrix of one mode of a two-mode state."""
    rho = as_density_matrix(state)
    space = rho.space
    if space.modes != 2:
        raise DimensionMismatchError("partial trace requires a two-mode state")
    space._check_mode(keep)
    d = space.cutoff
    r4 = rho.data.reshape(d, d, d, d)
    reduced = np.einsum("ikjk->ij", r4) if keep == 0 else np.einsum("kikj->ij", r4)
    return DensityMatrix(FockSpace(d, 1), np.ascontiguousarray(reduced))


def displacement_operator(space: FockSpace, alpha: complex, mode: int = 0) -> np.ndarray:
    """D(α) = exp(α a† − α* a)."""
    a, adag = space.ladder(mode)
    return matrix_exponential(alpha * adag - np.conj(alpha) * a)


def squeeze_operator(space: FockSpace, r: float, mode: int = 0) -> np.ndarray:
    """S(r) = exp[r/2 (a² − a†²)]; squeezes x for r > 0."""
    a, adag = space.ladder(mode)
    return matrix_exponential(0.5 * r * (a @ a - adag @ adag))


def two_mode_squeeze_operator(space: FockSpace, r: float) -> np.ndarray:
    """S2(r) = exp[r (a† b† − a b)] on a two-mode space."""
    if space.modes != 2:
        raise DimensionMismatchError("two-mode squeezing needs a two-mode space")
    a = space.annihilator(0)
    b = space.annihilator(1)
    adag, bdag = a.conj().T, b.conj().T
    return matrix_exponential(r * (adag @ bdag - a @ b))


def number_phase_rotation(rho: DensityMatrix, theta: float) -> DensityMatrix:
    """Conjugate by exp(-iθ n̂_total): the free rotation of every mode.

    Used to map interaction-picture states back to the lab frame; the
    rotation is parameter independent, so Fisher information is unchanged.
    """
    phases = np.exp(-1j * theta * rho.space.number_weights())
    return DensityMatrix(rho.space, phases[:, None] * rho.data * phases.conj()[None, :])


def first_moments(state: State) -> np.ndarray:
    """(<x>, <p>) of a single-mode state."""
    if state.space.modes != 1:
        raise DimensionMismatchError("first moments implemented for one mode")
    x, p = state.space.quadratures()
    return np.array([np.real(expectation(state, x)), np.real(expectation(state, p))])


def covariance_from_state(state: State) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and 2x2 covariance matrix (vacuum = identity convention)."""
    if state.space.modes != 1:
        raise DimensionMismatchError("covariance extraction implemented for one mode")
    x, p = state.space.quadratures()
    d = first_moments(state)
    ops = {
        "xx": x @ x,
        "pp": p @ p,
        "xp": (x @ p + p @ x) / 2,
    }
    sxx = 2 * (np.real(expectation(state, ops["xx"])) - d[0] ** 2)
    spp = 2 * (np.real(expectation(state, ops["pp"])) - d[1] ** 2)
    sxp = 2 * (np.real(expectation(state, ops["xp"])) - d[0] * d[1])
    return d, np.array([[sxx, sxp], [sxp, spp]])
