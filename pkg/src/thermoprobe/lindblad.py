"""Time integration of single- and two-mode Lindblad master equations.

The right-hand side is assembled from sparse operators acting on a dense
density matrix, dρ/dt = A ρ + ρ A† + Σ_k r_k L_k ρ L_k† with the drift
A = -iH - (1/2) Σ_k r_k L_k†L_k, which keeps memory at O(d²). Steps are
taken with an embedded Dormand-Prince 5(4) pair; every accepted step is
hermitized (ρ <- (ρ + ρ†)/2) and checked against a truncation-tail monitor
on the top two Fock levels of each mode.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, identity as sparse_identity, kron as sparse_kron
from scipy.sparse.linalg import eigs

from .errors import (
    DegenerateSteadyStateError,
    DimensionMismatchError,
    IntegrationError,
    TailBreachError,
)
from .fock import DensityMatrix, FockSpace
from .gaussian import BathSpec

DEFAULT_TAIL_TOL = 1e-5

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _csr(matrix) -> csr_matrix:
    return matrix if isinstance(matrix, csr_matrix) else csr_matrix(matrix)


@dataclass(frozen=True)
class Generator:
    """Immutable Lindblad generator: Hamiltonian plus (rate, jump) pairs."""

    space: FockSpace
    hamiltonian: csr_matrix | None
    jumps: tuple[tuple[float, csr_matrix], ...]
    _drift: csr_matrix = field(repr=False, default=None)
    _drift_conj: csr_matrix = field(repr=False, default=None)
    _jump_pairs: tuple = field(repr=False, default=None)

    @staticmethod
    def build(space: FockSpace, hamiltonian, jumps) -> "Generator":
        dim = space.dim
        ham = None if hamiltonian is None else _csr(hamiltonian.astype(complex))
        if ham is not None and ham.shape != (dim, dim):
            raise DimensionMismatchError("hamiltonian dimension != space")
        pairs = []
        drift = csr_matrix((dim, dim), dtype=complex)
        if ham is not None:
            drift = drift - 1j * ham
        for rate, op in jumps:
            if rate < 0:
                raise ValueError("jump rates must be nonnegative")
            if rate == 0.0:
                continue
            L = _csr(op.astype(complex))
            if L.shape != (dim, dim):
                raise DimensionMismatchError("jump operator dimension != space")
            drift = drift - 0.5 * rate * (L.conj().T @ L)
            pairs.append((rate, L.tocsr(), L.conj().tocsr()))
        gen = Generator(space, ham, tuple((r, L) for r, L, _ in pairs))
        object.__setattr__(gen, "_drift", drift.tocsr())
        object.__setattr__(gen, "_drift_conj", drift.conj().tocsr())
        object.__setattr__(gen, "_jump_pairs", tuple(pairs))
        return gen

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """dρ/dt for a dense density matrix."""
        out = self._drift @ rho
        out += (self._drift_conj @ rho.T).T
        for rate, L, L_conj in self._jump_pairs:
            out += rate * (L_conj @ (L @ rho).T).T
        return out


def single_mode_generator(space: FockSpace, bath: BathSpec,
                          include_hamiltonian: bool = True) -> Generator:
    """Damped oscillator: rates γ(n̄+1) on a and γ n̄ on a†.

    The free Hamiltonian ω a†a commutes with the dissipative structure, so
    dropping it (include_hamiltonian=False) is the exact interaction
    picture; lab-frame states are recovered with a number-phase rotation
    and no temperature-estimation quantity changes.
    """
    if space.modes != 1:
        raise DimensionMismatchError("single-mode generator needs a one-mode space")
    a = csr_matrix(space.annihilator())
    ham = bath.omega * (a.conj().T @ a) if include_hamiltonian else None
    jumps = [(bath.gamma * (bath.nbar + 1.0), a), (bath.gamma * bath.nbar, a.conj().T)]
    return Generator.build(space, ham, jumps)


def two_mode_hamiltonian(space: FockSpace, omega: float, coupling: complex) -> csr_matrix:
    """H = ω (a†a + b†b) + ξ* a b + ξ a†b† as a sparse matrix."""
    if space.modes != 2:
        raise DimensionMismatchError("two-mode hamiltonian needs a two-mode space")
    c = space.cutoff
    lad = csr_matrix(np.diag(np.sqrt(np.arange(1, c, dtype=float)), k=1).astype(complex))
    eye = sparse_identity(c, dtype=complex, format="csr")
    a = sparse_kron(lad, eye).tocsr()
    b = sparse_kron(eye, lad).tocsr()
    xi = complex(coupling)
    ham = omega * (a.conj().T @ a + b.conj().T @ b)
    ham = ham + np.conj(xi) * (a @ b) + xi * (a.conj().T @ b.conj().T)
    return ham.tocsr()


def pdc_coupling(g: float, pump_amplitude: float, pump_phase: float) -> complex:
    """ξ = g α_p e^{iφ} for a classically pumped down-converter."""
    return g * pump_amplitude * np.exp(1j * pump_phase)


def two_mode_generator(space: FockSpace, bath: BathSpec, coupling: complex,
                       include_hamiltonian: bool = True,
                       idler_omega: float | None = None) -> Generator:
    """Two modes in a common thermal bath, via collective jump operators.

    The common-bath cross terms are realised with L₋ = a + b at rate
    γ(n̄+1) and L₊ = a† + b† at rate γ n̄, which is completely positive and
    reproduces both the local rates and the degenerate cross rates
    Γ₁ = γ(n̄+1), Γ₂ = γ n̄. Only degenerate mode frequencies are supported.
    """
    if space.modes != 2:
        raise DimensionMismatchError("two-mode generator needs a two-mode space")
    if idler_omega is not None and idler_omega != bath.omega:
        raise ValueError("non-degenerate mode frequencies are not supported")
    c = space.cutoff
    lad = csr_matrix(np.diag(np.sqrt(np.arange(1, c, dtype=float)), k=1).astype(complex))
    eye = sparse_identity(c, dtype=complex, format="csr")
    a = sparse_kron(lad, eye).tocsr()
    b = sparse_kron(eye, lad).tocsr()
    collective_down = (a + b).tocsr()
    collective_up = collective_down.conj().T.tocsr()
    ham = two_mode_hamiltonian(space, bath.omega, coupling) if include_hamiltonian else None
    jumps = [
        (bath.gamma * (bath.nbar + 1.0), collective_down),
        (bath.gamma * bath.nbar, collective_up),
    ]
    return Generator.build(space, ham, jumps)


def _mode_tail(populations: np.ndarray, space: FockSpace) -> float:
    """Mass in the top two Fock levels, per mode (max over modes)."""
    c = space.cutoff
    if space.modes == 1:
        return float(populations[-2:].sum())
    grid = populations.reshape(c, c)
    tail_a = float(grid[-2:, :].sum())
    tail_b = float(grid[:, -2:].sum())
    return max(tail_a, tail_b)


@dataclass(frozen=True)
class Trajectory:
    """States sampled on a time grid, with integrator metadata."""

    space: FockSpace
    times: np.ndarray
    states: tuple[DensityMatrix, ...]
    steps: int
    rejected_steps: int
    min_step: float
    max_tail: float

    def state_at(self, index: int) -> DensityMatrix:
        return self.states[index]

    def to_csv(self) -> str:
        """time, trace, per-mode <n>, purity, top-level tail population."""
        space = self.space
        n_cols = (
            ["n_mean"] if space.modes == 1 else ["n_mean_a", "n_mean_b"]
        )
        out = io.StringIO()
        out.write(",".join(["time", "trace"] + n_cols + ["purity", "tail"]) + "\n")
        n = np.arange(space.cutoff, dtype=float)
        for t, rho in zip(self.times, self.states):
            pops = rho.populations()
            if space.modes == 1:
                n_means = [float(pops @ n)]
            else:
                grid = pops.reshape(space.cutoff, space.cutoff)
                n_means = [float(grid.sum(axis=1) @ n), float(grid.sum(axis=0) @ n)]
            cells = [t, rho.trace] + n_means + [rho.purity, _mode_tail(pops, space)]
            out.write(",".join(f"{value:.12g}" for value in cells) + "\n")
        return out.getvalue()


def evolve(rho0: DensityMatrix, generator: Generator, t_grid,
           rtol: float = 1e-9, atol: float = 1e-12,
           tail_tol: float = DEFAULT_TAIL_TOL,
           max_steps: int = 2_000_000) -> Trajectory:
    """Integrate dρ/dt = L(ρ) from t = 0, sampling at the given times.

    Steps adapt to the embedded 4th/5th-order error estimate; accepted
    steps are hermitized. Raises TailBreachError when the top two Fock
    levels of any mode accumulate more than tail_tol population (the
    cutoff is too small for the requested evolution).
    """
    if rho0.space != generator.space:
        raise DimensionMismatchError("initial state lives on a different space")
    times = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if times.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if times[0] < 0:
        raise ValueError("time grid must be nonnegative")

    rho = (rho0.data + rho0.data.conj().T) / 2.0
    t = 0.0
    h = min(1e-3, float(times[-1]) / 100.0)
    samples: list[DensityMatrix] = []
    sample_iter = iter(times)
    next_sample = next(sample_iter)
    steps = rejected = 0
    min_step = np.inf
    max_tail = 0.0
    space = generator.space

    def record(rho_now):
        nonlocal max_tail
        hermit = (rho_now + rho_now.conj().T) / 2.0
        dm = DensityMatrix(space, hermit)
        tail = _mode_tail(dm.populations(), space)
        max_tail = max(max_tail, tail)
        samples.append(dm)

    if next_sample == 0.0:
        record(rho)
        next_sample = next(sample_iter, None)

    k = [None] * 7
    while next_sample is not None:
        if steps + rejected > max_steps:
            raise IntegrationError("step budget exhausted")
        h = min(h, next_sample - t)
        if h < 1e-13 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow")

        k[0] = generator.apply(rho)
        for i in range(1, 7):
            stage = rho
            for j, aij in enumerate(_DP_A[i]):
                if aij != 0.0:
                    stage = stage + (h * aij) * k[j]
            k[i] = generator.apply(stage)
        rho5 = rho
        for i in range(7):
            if _DP_B5[i] != 0.0:
                rho5 = rho5 + (h * _DP_B5[i]) * k[i]
        err = np.zeros_like(rho)
        for i in range(7):
            diff = _DP_B5[i] - _DP_B4[i]
            if diff != 0.0:
                err = err + (h * diff) * k[i]
        scale = atol + rtol * max(np.max(np.abs(rho)), np.max(np.abs(rho5)))
        err_norm = np.max(np.abs(err)) / scale

        if err_norm <= 1.0:
            t += h
            rho = (rho5 + rho5.conj().T) / 2.0
            steps += 1
            min_step = min(min_step, h)
            tail = _mode_tail(np.real(np.diag(rho)), space)
            max_tail = max(max_tail, tail)
            if tail > tail_tol:
                raise TailBreachError(
                    f"top-level population {tail:.2e} exceeds {tail_tol:.1e} "
                    f"at t = {t:.4g}; raise the cutoff"
                )
            while next_sample is not None and t >= next_sample - 1e-12 * max(1.0, t):
                record(rho)
                next_sample = next(sample_iter, None)
        else:
            rejected += 1
        factor = 0.9 * err_norm ** (-0.2) if err_norm > 0 else 5.0
        h = h * min(5.0, max(0.2, factor))

    return Trajectory(
        space=space,
        times=times,
        states=tuple(samples),
        steps=steps,
        rejected_steps=rejected,
        min_step=float(min_step) if np.isfinite(min_step) else 0.0,
        max_tail=float(max_tail),
    )


def _superoperator(generator: Generator) -> csr_matrix:
    """Matrix of the generator on row-major-vectorised density matrices."""
    dim = generator.space.dim
    eye = sparse_identity(dim, dtype=complex, format="csr")
    super_op = csr_matrix((dim * dim, dim * dim), dtype=complex)
    if generator.hamiltonian is not None:
        ham = generator.hamiltonian
        super_op = super_op - 1j * (sparse_kron(ham, eye) - sparse_kron(eye, ham.T))
    for rate, L in generator.jumps:
        LdL = (L.conj().T @ L).tocsr()
        super_op = super_op + rate * (
            sparse_kron(L, L.conj())
            - 0.5 * sparse_kron(LdL, eye)
            - 0.5 * sparse_kron(eye, LdL.T)
        )
    return super_op.tocsr()


def steady_state(generator: Generator) -> DensityMatrix:
    """Normalised null vector of the generator.

    The two smallest generator eigenvalues are computed by shift-inverted
    Arnoldi iteration; a second eigenvalue at zero means the null space is
    degenerate (e.g. a dark mode decoupled from every jump operator) and
    raises DegenerateSteadyStateError instead of returning an arbitrary
    member of the fixed-point manifold.
    """
    if not generator.jumps:
        raise DegenerateSteadyStateError("unitary generator has no unique fixed point")
    dim = generator.space.dim
    super_op = _superoperator(generator).tocsc()
    rate_scale = max(rate for rate, _ in generator.jumps)
    v0 = np.full(dim * dim, 1.0 / dim, dtype=complex)
    values, vectors = eigs(
        super_op, k=2, sigma=1e-9 * rate_scale, which="LM", v0=v0, tol=1e-12
    )
    order = np.argsort(np.abs(values))
    if abs(values[order[1]]) < 1e-8 * rate_scale:
        raise DegenerateSteadyStateError(
            f"second generator eigenvalue {values[order[1]]:.2e} is also zero"
        )
    rho = vectors[:, order[0]].reshape(dim, dim)
    rho = (rho + rho.conj().T) / 2.0
    trace = np.real(np.trace(rho))
    if abs(trace) < 1e-10:
        raise DegenerateSteadyStateError("null vector is traceless")
    rho = rho / trace
    residual = np.max(np.abs(generator.apply(rho)))
    if residual > 1e-8 * max(1.0, rate_scale):
        raise DegenerateSteadyStateError(f"steady-state residual {residual:.2e}")
    return DensityMatrix(generator.space, rho)
