"""Built-in experiment presets ("figures"), keyed by integer id.

Each preset expands to the configuration that reproduces one benchmark
dataset: transient QFI comparisons at matched probe energy, ratio curves,
equilibrium CFI sweeps, and the kurtosis diagnostics. Parameter choices
that the benchmarks leave open (grids, the set of squeezing values) are
fixed here so that a preset always produces the same files.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError
from .gaussian import BathSpec
from .probes import ProbeSpec, match_energy

REFERENCE_BATH = BathSpec(omega=1.0, temperature=0.4, gamma=0.2)

# effective squeezing of the pumped down-converter used by the two-mode runs
PUMP_G = 0.08
PUMP_AMPLITUDE = 4.0
PUMP_PHASE = np.pi / 2

FIGURE_DESCRIPTIONS = {
    2: "transient QFI, Fock |4> vs energy-matched squeezed vacuum, plus their ratio R(t)",
    3: "transient QFI of five single-mode probes at matched energy E0 = 4.5",
    4: "transient QFI of two-mode probes at matched energy Et = 6 (pumped crystal)",
    5: "two-mode squeezed vacuum vs single-mode squeezed vacuum at r = 1, T = 0.8",
    6: "single-mode squeezed-thermal equilibrium: photon-number CFI, Wigner field, Var n vs r",
    7: "two-mode quadrature CFI vs T, and its low-T approximation vs r",
    8: "optimal (energy) CFI vs T, exact and low-T approximation",
    9: "Fock |6> QFI: exact population formula vs master-equation numerics",
    10: "kurtosis K(t) of four single-mode probes at four bath temperatures",
    11: "long-time QFI ratio R(t) at several temperatures",
    12: "population-difference CFI vs T for several squeezing values",
}


def figure_ids() -> tuple[int, ...]:
    return tuple(sorted(FIGURE_DESCRIPTIONS))


def _energy_matched_single_probes() -> tuple[ProbeSpec, ...]:
    return (
        match_energy("fock", 4.5),
        match_energy("squeezed-vacuum", 4.5),
        match_energy("coherent", 4.5),
        match_energy("cat", 4.5, parity="odd"),
        match_energy("gkp", 4.5),
    )


def _energy_matched_two_mode_probes() -> tuple[ProbeSpec, ...]:
    return (
        match_energy("tmsv", 6.0),
        match_energy("coherent", 6.0, modes=2),
        match_energy("noon", 6.0),
        match_energy("entangled-cat", 6.0, parity="even"),
        match_energy("entangled-cat", 6.0, parity="odd"),
    )


def figure_config(figure_id: int, overrides: dict[str, float] | None = None) -> ExperimentConfig:
    """Expand a preset id into a runnable configuration.

    ``overrides`` may adjust scalar preset parameters (``r``, ``omega``,
    ``temperature`` where the preset uses them); unknown overrides are a
    configuration error.
    """
    pending = dict(overrides or {})
    config = _build_figure(figure_id, pending)
    if pending:
        raise ConfigError(f"figure {figure_id} does not accept overrides {sorted(pending)}")
    return config.override(figure_overrides=tuple(sorted((overrides or {}).items())))


def _build_figure(figure_id: int, overrides: dict[str, float]) -> ExperimentConfig:
    if figure_id not in FIGURE_DESCRIPTIONS:
        raise ConfigError(f"unknown figure id {figure_id}")

    name = f"figure{figure_id}"

    if figure_id == 2:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=2,
            probes=(match_energy("fock", 4.5), match_energy("squeezed-vacuum", 4.5)),
            bath=REFERENCE_BATH,
            t_grid=tuple(np.linspace(0.05, 25.0, 56)),
            temperatures=(0.3, 0.4, 0.7),
            cutoff=60,
        )
    if figure_id == 3:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=3,
            probes=_energy_matched_single_probes(),
            bath=REFERENCE_BATH,
            t_grid=tuple(np.linspace(0.05, 25.0, 40)),
            cutoff=60,
        )
    if figure_id == 4:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=4,
            probes=_energy_matched_two_mode_probes(),
            bath=REFERENCE_BATH,
            t_grid=tuple(np.linspace(0.25, 10.0, 24)),
            model="two",
            coupling_g=PUMP_G,
            pump_amplitude=PUMP_AMPLITUDE,
            pump_phase=PUMP_PHASE,
            cutoff=20,
        )
    if figure_id == 5:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=5,
            probes=(ProbeSpec.tmsv(1.0), ProbeSpec.squeezed_vacuum(1.0)),
            bath=BathSpec(omega=1.0, temperature=overrides.pop("temperature", 0.8), gamma=0.2),
            t_grid=tuple(np.linspace(0.25, 10.0, 24)),
            model="two",
            coupling_g=PUMP_G,
            pump_amplitude=PUMP_AMPLITUDE,
            pump_phase=PUMP_PHASE,
            cutoff=20,
        )
    if figure_id == 6:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=6,
            omega=overrides.pop("omega", 1.0),
            r_values=(0.2, 0.5, 0.8, 1.2),
            sweep_grid=tuple(np.linspace(0.05, 3.0, 60)),
            sweep_name="T",
        )
    if figure_id == 7:
        omega = overrides.pop("omega", 1.0)
        r_values = (overrides.pop("r"),) if "r" in overrides else (0.1, 0.5, 0.9)
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=7,
            omega=omega,
            r_values=r_values,
            observables=("quadrature-two", "quadrature-two-low-t"),
            sweep_grid=tuple(np.linspace(0.02, 1.2, 60)),
            sweep_name="T",
        )
    if figure_id == 8:
        omega = overrides.pop("omega", 2.0)
        r_values = (overrides.pop("r"),) if "r" in overrides else (0.5, 1.0, 1.5, 1.9)
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=8,
            omega=omega,
            r_values=r_values,
            observables=("optimal", "optimal-low-t"),
            sweep_grid=tuple(np.linspace(0.02, 1.5, 60)),
            sweep_name="T",
        )
    if figure_id == 9:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=9,
            probes=(ProbeSpec.fock(6),),
            bath=REFERENCE_BATH,
            t_grid=tuple(np.linspace(0.1, 20.0, 40)),
            cutoff=60,
        )
    if figure_id == 10:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=10,
            probes=(
                ProbeSpec.coherent(2.0),
                ProbeSpec.squeezed_vacuum(0.5),
                ProbeSpec.fock(6),
                ProbeSpec.gkp(0.08),
            ),
            bath=BathSpec(omega=1.0, temperature=0.5, gamma=0.2),  # gamma, omega shared
            temperatures=(0.1, 0.5, 1.0, 2.0),
            t_grid=tuple(np.linspace(0.0, 25.0, 40)),
            cutoff=60,
        )
    if figure_id == 11:
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=11,
            probes=(ProbeSpec.fock(4),),
            bath=REFERENCE_BATH,
            temperatures=(0.3, 0.5, 0.7),
            t_grid=tuple(np.linspace(0.05, 50.0, 100)),
        )
    if figure_id == 12:
        omega = overrides.pop("omega", 2.0)
        r_values = (overrides.pop("r"),) if "r" in overrides else (0.5, 1.0, 1.5, 1.9)
        return ExperimentConfig(
            kind="figure",
            name=name,
            figure_id=12,
            omega=omega,
            r_values=r_values,
            observables=("population-difference",),
            sweep_grid=tuple(np.linspace(0.05, 1.5, 60)),
            sweep_name="T",
        )
    raise ConfigError(f"unknown figure id {figure_id}")
