"""Probe-state families: preparation, energies, and energy matching.

Energy convention: a single-mode state carries the zero-point offset,
``E = ω (<n> + 1/2)``, so a Fock state |4> at ω = 1 has E = 4.5 and the
energy-matched squeezed vacuum obeys ``r = asinh sqrt(E/ω - 1/2)``.
Two-mode targets are offset free, ``E = ω <n_a + n_b>``, which makes the
matched parameters ``α = sqrt(E/2ω)`` (coherent pair) and
``r = asinh sqrt(E/2ω)`` (two-mode squeezed vacuum) exact.

States are assembled on an enlarged working space and truncated down to
the requested cutoff; the probability that leaks past the cutoff is the
truncation tail, and preparation refuses when it exceeds ``tail_tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import csr_matrix, identity as sparse_identity, kron as sparse_kron
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply

from .errors import CutoffInsufficientError, InvalidProbeError, UnreachableEnergyError
from .fock import DensityMatrix, FockSpace, State, StateVector, matrix_exponential

SQRT_PI = np.sqrt(np.pi)

# family -> (number of modes, ordered parameter names, integer-valued params)
_FAMILIES = {
    "fock": (1, ("n0",), {"n0"}),
    "coherent": (None, ("alpha",), set()),  # 1 or 2 modes (product state)
    "squeezed-vacuum": (1, ("r",), set()),
    "cat": (1, ("alpha", "parity"), set()),
    "gkp": (1, ("delta", "r", "kmax"), {"kmax"}),
    "thermal": (1, ("nbar",), set()),
    "squeezed-thermal": (1, ("r", "nbar"), set()),
    "tmsv": (2, ("r",), set()),
    "noon": (2, ("n",), {"n"}),
    "entangled-cat": (2, ("alpha", "parity"), set()),
}

GKP_DEFAULT_R = 0.5
GKP_DEFAULT_KMAX = 6


@dataclass(frozen=True)
class ProbeSpec:
    """Tagged description of an initial probe state."""

    family: str
    params: tuple[tuple[str, float | int | str], ...] = field(default=())
    target_energy: float | None = None

    def __post_init__(self):
        validate_probe(self)

    def param(self, name):
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def modes_required(self) -> int | None:
        """1, 2, or None when the family works on either space."""
        return _FAMILIES[self.family][0]

    # -- constructors ------------------------------------------------------

    @staticmethod
    def fock(n0: int) -> "ProbeSpec":
        return ProbeSpec("fock", (("n0", int(n0)),))

    @staticmethod
    def coherent(alpha: float) -> "ProbeSpec":
        return ProbeSpec("coherent", (("alpha", float(alpha)),))

    @staticmethod
    def squeezed_vacuum(r: float) -> "ProbeSpec":
        return ProbeSpec("squeezed-vacuum", (("r", float(r)),))

    @staticmethod
    def cat(alpha: float, parity: str = "odd") -> "ProbeSpec":
        return ProbeSpec("cat", (("alpha", float(alpha)), ("parity", parity)))

    @staticmethod
    def gkp(delta: float, r: float = GKP_DEFAULT_R, kmax: int = GKP_DEFAULT_KMAX) -> "ProbeSpec":
        return ProbeSpec("gkp", (("delta", float(delta)), ("r", float(r)), ("kmax", int(kmax))))

    @staticmethod
    def thermal(nbar: float) -> "ProbeSpec":
        return ProbeSpec("thermal", (("nbar", float(nbar)),))

    @staticmethod
    def squeezed_thermal(r: float, nbar: float) -> "ProbeSpec":
        return ProbeSpec("squeezed-thermal", (("r", float(r)), ("nbar", float(nbar))))

    @staticmethod
    def tmsv(r: float) -> "ProbeSpec":
        return ProbeSpec("tmsv", (("r", float(r)),))

    @staticmethod
    def noon(n: int) -> "ProbeSpec":
        return ProbeSpec("noon", (("n", int(n)),))

    @staticmethod
    def entangled_cat(alpha: float, parity: str = "even") -> "ProbeSpec":
        return ProbeSpec("entangled-cat", (("alpha", float(alpha)), ("parity", parity)))

    def with_target_energy(self, energy: float) -> "ProbeSpec":
        return ProbeSpec(self.family, self.params, float(energy))


def validate_probe(spec: ProbeSpec) -> None:
    if spec.family not in _FAMILIES:
        raise InvalidProbeError(f"unknown probe family {spec.family!r}")
    _, names, int_params = _FAMILIES[spec.family]
    given = dict(spec.params)
    missing = [n for n in names if n not in given]
    if missing:
        raise InvalidProbeError(f"{spec.family}: missing parameters {missing}")
    extra = [k for k in given if k not in names]
    if extra:
        raise InvalidProbeError(f"{spec.family}: unknown parameters {extra}")
    for name in int_params:
        if given[name] != int(given[name]):
            raise InvalidProbeError(f"{spec.family}: {name} must be an integer")
    if "parity" in given and given["parity"] not in ("even", "odd"):
        raise InvalidProbeError("parity must be 'even' or 'odd'")
    for name in ("r", "delta", "nbar"):
        if name in given and given[name] < 0:
            raise InvalidProbeError(f"{spec.family}: {name} must be >= 0")
    if "alpha" in given and given["alpha"] < 0:
        raise InvalidProbeError("alpha is taken real and >= 0 by convention")
    if "n0" in given and given["n0"] < 0:
        raise InvalidProbeError("n0 must be a nonnegative integer")
    if "n" in given and given["n"] < 1:
        raise InvalidProbeError("NOON photon number must be >= 1")
    if spec.family == "gkp" and given["delta"] <= 0:
        raise InvalidProbeError("gkp envelope delta must be > 0")


# -- flat text form --------------------------------------------------------

def probe_to_string(spec: ProbeSpec) -> str:
    """Flat key=value form, e.g. ``family=gkp delta=0.08 r=0.5 kmax=6``."""
    parts = [f"family={spec.family}"]
    for key, value in spec.params:
        parts.append(f"{key}={value}")
    if spec.target_energy is not None:
        parts.append(f"target_energy={spec.target_energy}")
    return " ".join(parts)


def probe_from_string(text: str) -> ProbeSpec:
    tokens = text.split()
    kv = {}
    for token in tokens:
        if "=" not in token:
            raise InvalidProbeError(f"malformed probe token {token!r}")
        key, value = token.split("=", 1)
        kv[key.strip()] = value.strip()
    family = kv.pop("family", None)
    if family is None:
        raise InvalidProbeError("probe string must contain family=<name>")
    if family not in _FAMILIES:
        raise InvalidProbeError(f"unknown probe family {family!r}")
    target = kv.pop("target_energy", None)
    _, names, int_params = _FAMILIES[family]
    params = []
    for name in names:
        if name not in kv:
            raise InvalidProbeError(f"{family}: missing parameter {name!r}")
        raw = kv.pop(name)
        if name == "parity":
            params.append((name, raw))
        elif name in int_params:
            params.append((name, int(raw)))
        else:
            params.append((name, float(raw)))
    if kv:
        raise InvalidProbeError(f"{family}: unknown parameters {sorted(kv)}")
    return ProbeSpec(family, tuple(params), None if target is None else float(target))


# -- sparse helpers on a working space -------------------------------------

def _sparse_ladder(cutoff: int) -> csr_matrix:
    return diags(np.sqrt(np.arange(1, cutoff)), 1, dtype=complex, format="csr")


def _sparse_mode_op(op: csr_matrix, cutoff: int, mode: int, modes: int) -> csr_matrix:
    if modes == 1:
        return op
    eye = sparse_identity(cutoff, dtype=complex, format="csr")
    return (sparse_kron(op, eye) if mode == 0 else sparse_kron(eye, op)).tocsr()


def _displaced_squeezed(work: FockSpace, alpha: float, r: float) -> np.ndarray:
    """D(α) S(r) |0> built by generator action (machine precision)."""
    a = _sparse_ladder(work.cutoff)
    adag = a.conj().T.tocsr()
    psi = work.vacuum()
    if r != 0.0:
        psi = expm_multiply(0.5 * r * (a @ a - adag @ adag), psi)
    if alpha != 0.0:
        psi = expm_multiply(alpha * adag - np.conj(alpha) * a, psi)
    return psi


def _work_cutoff(cutoff: int, modes: int) -> int:
    if modes == 1:
        return cutoff + max(24, cutoff // 3)
    return cutoff + max(12, cutoff // 4)


def _truncate_vector(psi: np.ndarray, work: FockSpace, space: FockSpace) -> tuple[np.ndarray, float]:
    """Project a normalised working-space vector down; return (vector, tail mass)."""
    c = space.cutoff
    if space.modes == 1:
        kept = psi[:c]
    else:
        kept = psi.reshape(work.cutoff, work.cutoff)[:c, :c].ravel()
    tail = float(1.0 - np.linalg.norm(kept) ** 2)
    return kept, tail


def _finish_pure(psi_work: np.ndarray, work: FockSpace, space: FockSpace, tail_tol: float) -> StateVector:
    psi_work = psi_work / np.linalg.norm(psi_work)
    kept, tail = _truncate_vector(psi_work, work, space)
    if tail > tail_tol:
        raise CutoffInsufficientError(
            f"truncation tail {tail:.3e} exceeds {tail_tol:.1e}; raise the cutoff"
        )
    return StateVector(space, kept / np.linalg.norm(kept))


def _thermal_populations(nbar: float, cutoff: int) -> tuple[np.ndarray, float]:
    if nbar == 0.0:
        p = np.zeros(cutoff)
        p[0] = 1.0
        return p, 0.0
    q = nbar / (nbar + 1.0)
    p = (1.0 - q) * q ** np.arange(cutoff)
    return p, float(q**cutoff)


def prepare(space: FockSpace, spec: ProbeSpec, tail_tol: float = 1e-6) -> State:
    """Prepare the probe on the given space.

    Pure families return a StateVector; thermal and squeezed-thermal return
    a DensityMatrix. Raises CutoffInsufficientError when more than tail_tol
    of the state lies beyond the cutoff.
    """
    required = spec.modes_required()
    if required is not None and required != space.modes:
        raise InvalidProbeError(
            f"{spec.family} probe needs a {required}-mode space, got {space.modes}"
        )

    if spec.family == "fock":
        n0 = spec.param("n0")
        if n0 >= space.cutoff:
            raise CutoffInsufficientError(f"fock level {n0} beyond cutoff {space.cutoff}")
        return StateVector(space, space.basis_vector(n0))

    if spec.family == "noon":
        n = spec.param("n")
        if n >= space.cutoff:
            raise CutoffInsufficientError(f"NOON level {n} beyond cutoff {space.cutoff}")
        psi = (space.basis_vector(n, 0) + space.basis_vector(0, n)) / np.sqrt(2.0)
        return StateVector(space, psi)

    if spec.family == "thermal":
        p, tail = _thermal_populations(spec.param("nbar"), space.cutoff)
        if tail > tail_tol:
            raise CutoffInsufficientError(
                f"thermal tail {tail:.3e} exceeds {tail_tol:.1e}; raise the cutoff"
            )
        return DensityMatrix(space, np.diag(p / p.sum()).astype(complex))

    work = FockSpace(_work_cutoff(space.cutoff, space.modes), space.modes)

    if spec.family == "squeezed-thermal":
        p, _ = _thermal_populations(spec.param("nbar"), work.cutoff)
        a = work.annihilator()
        adag = a.conj().T
        squeezer = matrix_exponential(0.5 * spec.param("r") * (a @ a - adag @ adag))
        rho_work = squeezer @ np.diag(p / p.sum()).astype(complex) @ squeezer.conj().T
        c = space.cutoff
        block = rho_work[:c, :c]
        tail = float(1.0 - np.real(np.trace(block)))
        if tail > tail_tol:
            raise CutoffInsufficientError(
                f"truncation tail {tail:.3e} exceeds {tail_tol:.1e}; raise the cutoff"
            )
        block = (block + block.conj().T) / 2
        return DensityMatrix(space, block / np.real(np.trace(block)))

    if spec.family == "coherent":
        alpha = spec.param("alpha")
        a0 = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 0, work.modes)
        gen = alpha * a0.conj().T - np.conj(alpha) * a0
        if work.modes == 2:
            a1 = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 1, work.modes)
            gen = gen + alpha * a1.conj().T - np.conj(alpha) * a1
        psi = expm_multiply(gen.tocsr(), work.vacuum())
        return _finish_pure(psi, work, space, tail_tol)

    if spec.family == "squeezed-vacuum":
        psi = _displaced_squeezed(work, 0.0, spec.param("r"))
        return _finish_pure(psi, work, space, tail_tol)

    if spec.family == "cat":
        alpha, parity = spec.param("alpha"), spec.param("parity")
        if alpha == 0.0 and parity == "odd":
            raise InvalidProbeError("odd cat is undefined at alpha = 0")
        sign = 1.0 if parity == "even" else -1.0
        plus = _displaced_squeezed(work, alpha, 0.0)
        minus = _displaced_squeezed(work, -alpha, 0.0)
        return _finish_pure(plus + sign * minus, work, space, tail_tol)

    if spec.family == "gkp":
        delta, r, kmax = spec.param("delta"), spec.param("r"), spec.param("kmax")
        psi = np.zeros(work.dim, dtype=complex)
        for k in range(-kmax, kmax + 1):
            weight = np.exp(-2.0 * np.pi * delta * k * k)
            if weight < 1e-12:
                continue
            psi = psi + weight * _displaced_squeezed(work, 2.0 * k * SQRT_PI, r)
        return _finish_pure(psi, work, space, tail_tol)

    if spec.family == "tmsv":
        a = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 0, 2)
        b = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 1, 2)
        gen = spec.param("r") * (a.conj().T @ b.conj().T - a @ b)
        psi = expm_multiply(gen.tocsr(), work.vacuum())
        return _finish_pure(psi, work, space, tail_tol)

    if spec.family == "entangled-cat":
        alpha, parity = spec.param("alpha"), spec.param("parity")
        if alpha == 0.0 and parity == "odd":
            raise InvalidProbeError("odd entangled cat is undefined at alpha = 0")
        sign = 1.0 if parity == "even" else -1.0
        a = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 0, 2)
        b = _sparse_mode_op(_sparse_ladder(work.cutoff), work.cutoff, 1, 2)
        psi = np.zeros(work.dim, dtype=complex)
        for s in (alpha, -alpha):
            gen = (s * (a.conj().T + b.conj().T) - np.conj(s) * (a + b)).tocsr()
            component = expm_multiply(gen, work.vacuum())
            psi = psi + (component if s == alpha else sign * component)
        return _finish_pure(psi, work, space, tail_tol)

    raise InvalidProbeError(f"unhandled probe family {spec.family!r}")


def mean_energy(state: State, omega: float) -> float:
    """E = ω(<n_total> + offset), offset 1/2 for one mode and 0 for two."""
    weights = state.space.number_weights()
    n_mean = float(np.real(np.dot(weights, state.populations())))
    offset = 0.5 if state.space.modes == 1 else 0.0
    return omega * (n_mean + offset)


def _default_match_cutoff(family: str) -> int:
    return {"cat": 80, "gkp": 160, "entangled-cat": 40}.get(family, 60)


def match_energy(
    family: str,
    e_target: float,
    omega: float = 1.0,
    *,
    modes: int | None = None,
    cutoff: int | None = None,
    parity: str | None = None,
    gkp_r: float = GKP_DEFAULT_R,
    gkp_kmax: int = GKP_DEFAULT_KMAX,
) -> ProbeSpec:
    """Pick the family parameter that hits the target mean energy.

    Closed forms where they exist; for cat and GKP states the parameter is
    found by root bracketing on the energy of the prepared (truncated)
    state. The result round-trips through mean_energy to within 1e-6.
    """
    if e_target <= 0:
        raise UnreachableEnergyError("target energy must be positive")
    excess = e_target / omega - 0.5  # single-mode <n> target

    if family == "fock":
        n0 = round(excess)
        if n0 < 0 or abs(excess - n0) > 1e-9:
            raise UnreachableEnergyError(
                f"fock energy must be ω(n+1/2); got <n> target {excess}"
            )
        return ProbeSpec.fock(n0).with_target_energy(e_target)

    if family == "squeezed-vacuum":
        if excess < 0:
            raise UnreachableEnergyError("target below the single-mode ground state")
        return ProbeSpec.squeezed_vacuum(float(np.arcsinh(np.sqrt(excess)))).with_target_energy(e_target)

    if family == "thermal":
        if excess < 0:
            raise UnreachableEnergyError("target below the single-mode ground state")
        return ProbeSpec.thermal(excess).with_target_energy(e_target)

    if family == "coherent":
        if modes == 2:
            return ProbeSpec.coherent(float(np.sqrt(e_target / (2 * omega)))).with_target_energy(e_target)
        if excess < 0:
            raise UnreachableEnergyError("target below the single-mode ground state")
        return ProbeSpec.coherent(float(np.sqrt(excess))).with_target_energy(e_target)

    if family == "tmsv":
        return ProbeSpec.tmsv(float(np.arcsinh(np.sqrt(e_target / (2 * omega))))).with_target_energy(e_target)

    if family == "noon":
        n = max(1, round(e_target / omega))
        return ProbeSpec.noon(n).with_target_energy(e_target)

    if family in ("cat", "entangled-cat"):
        par = parity or ("odd" if family == "cat" else "even")
        n_modes = 1 if family == "cat" else 2
        space = FockSpace(cutoff or _default_match_cutoff(family), n_modes)

        def make(alpha: float) -> ProbeSpec:
            if family == "cat":
                return ProbeSpec.cat(alpha, par)
            return ProbeSpec.entangled_cat(alpha, par)

        def energy_gap(alpha: float) -> float:
            # loose gate: tail_tol only guards refusal, not the state itself
            return mean_energy(prepare(space, make(alpha), tail_tol=1e-2), omega) - e_target

        lo, hi = 1e-3, 0.5
        while energy_gap(hi) < 0 and hi < 16:
            hi *= 2
        if energy_gap(lo) > 0 or energy_gap(hi) < 0:
            raise UnreachableEnergyError(
                f"{family} target {e_target} unreachable for alpha in [{lo}, {hi}]"
            )
        alpha = brentq(energy_gap, lo, hi, xtol=1e-10, rtol=1e-12)
        return make(float(alpha)).with_target_energy(e_target)

    if family == "gkp":
        space = FockSpace(cutoff or _default_match_cutoff("gkp"), 1)

        def energy_gap(delta: float) -> float:
            spec = ProbeSpec.gkp(delta, gkp_r, gkp_kmax)
            return mean_energy(prepare(space, spec, tail_tol=1e-2), omega) - e_target

        lo, hi = 0.05, 2.0  # energy decreases with delta
        if energy_gap(hi) > 0 or energy_gap(lo) < 0:
            raise UnreachableEnergyError(
                f"gkp target {e_target} unreachable for delta in [{lo}, {hi}] at r={gkp_r}"
            )
        delta = brentq(energy_gap, lo, hi, xtol=1e-10, rtol=1e-12)
        return ProbeSpec.gkp(float(delta), gkp_r, gkp_kmax).with_target_energy(e_target)

    raise InvalidProbeError(f"energy matching not defined for family {family!r}")
