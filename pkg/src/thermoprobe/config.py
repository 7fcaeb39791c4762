"""Experiment configuration: a flat sectioned key=value text format.

Example::

    [experiment]
    kind = transient-qfi
    name = fock-vs-svs

    [probe]
    spec = family=fock n0=4
    spec = family=squeezed-vacuum r=1.4436354751788103

    [bath]
    omega = 1.0
    temperature = 0.4
    gamma = 0.2

    [grid]
    t = 0.05:25:60

    [engine]
    cutoff = 60
    tol = 1e-4
    workers = 1

    [output]
    svg = true

Grids are ``start:stop:count`` (inclusive linspace) or comma-separated
values. Repeated ``spec`` keys accumulate probes in order. Configs
round-trip losslessly through ``to_text``/``parse_config``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .gaussian import BathSpec
from .probes import ProbeSpec, probe_from_string, probe_to_string

EXPERIMENT_KINDS = ("transient-qfi", "ratio", "equilibrium-cfi", "diagnostics", "figure")

EQUILIBRIUM_OBSERVABLES = (
    "photon-number",
    "quadrature-single",
    "quadrature-two",
    "quadrature-two-low-t",
    "optimal",
    "optimal-low-t",
    "population-difference",
)


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError("grid count must be >= 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    if not values:
        raise ConfigError("empty grid")
    return values


def format_grid(values: tuple[float, ...]) -> str:
    return ",".join(repr(float(v)) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    name: str = ""
    probes: tuple[ProbeSpec, ...] = ()
    bath: BathSpec | None = None
    t_grid: tuple[float, ...] = ()
    sweep_grid: tuple[float, ...] = ()
    sweep_name: str = "T"
    model: str = "single"
    coupling_g: float = 0.0
    pump_amplitude: float = 0.0
    pump_phase: float = 0.0
    omega: float = 1.0
    r_values: tuple[float, ...] = ()
    observables: tuple[str, ...] = ()
    temperatures: tuple[float, ...] = ()
    figure_id: int | None = None
    figure_overrides: tuple[tuple[str, float], ...] = ()
    cutoff: int | None = None
    tol: float = 1e-4
    workers: int = 1
    out_dir: str = "out"
    svg: bool = False

    @property
    def coupling(self) -> complex:
        return self.coupling_g * self.pump_amplitude * np.exp(1j * self.pump_phase)

    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "figure" and self.figure_id is not None:
            return f"figure{self.figure_id}"
        return self.kind

    def override(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)

    def to_text(self) -> str:
        lines = ["[experiment]", f"kind = {self.kind}"]
        if self.name:
            lines.append(f"name = {self.name}")
        if self.kind == "figure":
            lines.append(f"id = {self.figure_id}")
            for key, value in self.figure_overrides:
                lines.append(f"{key} = {value!r}")
        if self.probes:
            lines.append("")
            lines.append("[probe]")
            for probe in self.probes:
                lines.append(f"spec = {probe_to_string(probe)}")
        if self.bath is not None:
            lines.append("")
            lines.append("[bath]")
            lines.append(f"omega = {self.bath.omega!r}")
            lines.append(f"temperature = {self.bath.temperature!r}")
            lines.append(f"gamma = {self.bath.gamma!r}")
        grid_lines = []
        if self.t_grid:
            grid_lines.append(f"t = {format_grid(self.t_grid)}")
        if self.sweep_grid:
            grid_lines.append(f"{self.sweep_name} = {format_grid(self.sweep_grid)}")
        if grid_lines:
            lines.append("")
            lines.append("[grid]")
            lines.extend(grid_lines)
        if self.kind == "transient-qfi":
            lines.append("")
            lines.append("[model]")
            lines.append(f"kind = {self.model}")
            if self.model == "two":
                lines.append(f"coupling_g = {self.coupling_g!r}")
                lines.append(f"pump_amplitude = {self.pump_amplitude!r}")
                lines.append(f"pump_phase = {self.pump_phase!r}")
        if self.kind == "equilibrium-cfi":
            lines.append("")
            lines.append("[equilibrium]")
            lines.append(f"omega = {self.omega!r}")
            lines.append(f"r = {format_grid(self.r_values)}")
            lines.append(f"observables = {','.join(self.observables)}")
        if self.kind == "diagnostics" and self.temperatures:
            lines.append("")
            lines.append("[diagnostics]")
            lines.append(f"temperatures = {format_grid(self.temperatures)}")
        lines.append("")
        lines.append("[engine]")
        if self.cutoff is not None:
            lines.append(f"cutoff = {self.cutoff}")
        lines.append(f"tol = {self.tol!r}")
        lines.append(f"workers = {self.workers}")
        lines.append("")
        lines.append("[output]")
        lines.append(f"dir = {self.out_dir}")
        lines.append(f"svg = {'true' if self.svg else 'false'}")
        return "\n".join(lines) + "\n"


def _parse_sections(text: str) -> dict[str, list[tuple[str, str]]]:
    sections: dict[str, list[tuple[str, str]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = line.split("=", 1)
        sections[current].append((key.strip(), value.strip()))
    return sections


def _single(sections, section, key, default=None, required=False):
    entries = [v for k, v in sections.get(section, []) if k == key]
    if not entries:
        if required:
            raise ConfigError(f"missing {section}.{key}")
        return default
    if len(entries) > 1:
        raise ConfigError(f"{section}.{key} given more than once")
    return entries[0]


def parse_config(text: str) -> ExperimentConfig:
    sections = _parse_sections(text)
    kind = _single(sections, "experiment", "kind", required=True)
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    name = _single(sections, "experiment", "name", default="")

    probes = tuple(
        probe_from_string(v) for k, v in sections.get("probe", []) if k == "spec"
    )

    bath = None
    if "bath" in sections:
        bath = BathSpec(
            omega=float(_single(sections, "bath", "omega", required=True)),
            temperature=float(_single(sections, "bath", "temperature", required=True)),
            gamma=float(_single(sections, "bath", "gamma", required=True)),
        )

    t_grid: tuple[float, ...] = ()
    sweep_grid: tuple[float, ...] = ()
    sweep_name = "T"
    for key, value in sections.get("grid", []):
        if key == "t":
            t_grid = parse_grid(value)
        elif key in ("T", "r"):
            sweep_grid = parse_grid(value)
            sweep_name = key
        else:
            raise ConfigError(f"unknown grid variable {key!r}")

    model = _single(sections, "model", "kind", default="single")
    coupling_g = float(_single(sections, "model", "coupling_g", default="0.0"))
    pump_amplitude = float(_single(sections, "model", "pump_amplitude", default="0.0"))
    pump_phase = float(_single(sections, "model", "pump_phase", default="0.0"))

    omega = float(_single(sections, "equilibrium", "omega", default="1.0"))
    r_text = _single(sections, "equilibrium", "r", default=None)
    r_values = parse_grid(r_text) if r_text else ()
    obs_text = _single(sections, "equilibrium", "observables", default="")
    observables = tuple(tok.strip() for tok in obs_text.split(",") if tok.strip())
    for obs in observables:
        if obs not in EQUILIBRIUM_OBSERVABLES:
            raise ConfigError(f"unknown observable {obs!r}")

    temp_text = _single(sections, "diagnostics", "temperatures", default=None)
    temperatures = parse_grid(temp_text) if temp_text else ()

    figure_id = None
    figure_overrides: list[tuple[str, float]] = []
    if kind == "figure":
        figure_id = int(_single(sections, "experiment", "id", required=True))
        for key, value in sections.get("experiment", []):
            if key in ("kind", "name", "id"):
                continue
            figure_overrides.append((key, float(value)))

    cutoff_text = _single(sections, "engine", "cutoff", default=None)
    svg_text = _single(sections, "output", "svg", default="false")
    return ExperimentConfig(
        kind=kind,
        name=name,
        probes=probes,
        bath=bath,
        t_grid=t_grid,
        sweep_grid=sweep_grid,
        sweep_name=sweep_name,
        model=model,
        coupling_g=coupling_g,
        pump_amplitude=pump_amplitude,
        pump_phase=pump_phase,
        omega=omega,
        r_values=r_values,
        observables=observables,
        temperatures=temperatures,
        figure_id=figure_id,
        figure_overrides=tuple(figure_overrides),
        cutoff=None if cutoff_text is None else int(cutoff_text),
        tol=float(_single(sections, "engine", "tol", default="1e-4")),
        workers=int(_single(sections, "engine", "workers", default="1")),
        out_dir=_single(sections, "output", "dir", default="out"),
        svg=svg_text.lower() in ("true", "1", "yes"),
    )
