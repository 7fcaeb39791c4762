"""Batch experiment runner.

A configuration compiles to an ordered list of tasks; each task produces
one CSV dataset. Tasks run serially or in a process pool (``workers``),
and results are merged back in compile order, so the emitted bytes do not
depend on the worker count. Data files carry no timestamps; provenance
(config hash, engine versions, cutoffs, error summaries, wall-clock time)
goes to ``manifest.txt``. Output files are written only after every task
has finished, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import hashlib
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, parse_config
from .diagnostics import kurtosis_trajectory, photon_variance, wigner_gaussian
from .equilibrium import (
    cfi_optimal,
    cfi_optimal_low_temperature,
    cfi_photon_number_single,
    cfi_population_difference,
    cfi_quadrature_single,
    cfi_quadrature_two,
    cfi_quadrature_two_low_temperature,
    normal_modes,
)
from .errors import ConfigError, InstabilityError, ThermoprobeError
from .figures import FIGURE_DESCRIPTIONS, figure_config, figure_ids
from .fisher import fock_qfi_exact, qfi_ratio_curve, transient_qfi_curve
from .fock import FockSpace
from .gaussian import BathSpec, GaussianState
from .probes import ProbeSpec, prepare, probe_to_string

OUTPUT_DIR_ENV = "THERMOPROBE_OUT"
GKP_MIN_CUTOFF = 170

_EQUILIBRIUM_DISPATCH = {
    "photon-number": lambda omega, r, T: cfi_photon_number_single(r or 0.0, omega, T),
    "quadrature-single": lambda omega, r, T: cfi_quadrature_single(omega, T),
    "quadrature-two": lambda omega, r, T: cfi_quadrature_two(omega, r or 0.0, T),
    "quadrature-two-low-t": lambda omega, r, T: cfi_quadrature_two_low_temperature(
        omega, r or 0.0, T
    ),
    "optimal": lambda omega, r, T: cfi_optimal(omega, r or 0.0, T),
    "optimal-low-t": lambda omega, r, T: cfi_optimal_low_temperature(omega, r or 0.0, T),
    "population-difference": lambda omega, r, T: cfi_population_difference(
        omega, r or 0.0, T
    ),
}


def _fmt(value: float) -> str:
    return f"{value:.12g}"


@dataclass(frozen=True)
class QfiCurveTask:
    filename: str
    probe: ProbeSpec
    bath: BathSpec
    model: str
    coupling: complex
    t_grid: tuple[float, ...]
    cutoff: int | None
    rtol: float
    prep_tail_tol: float = 1e-6
    evolve_tail_tol: float = 1e-5
    label: str = ""

    def execute(self):
        curve = transient_qfi_curve(
            self.probe,
            self.bath,
            self.model,
            self.t_grid,
            cutoff=self.cutoff,
            coupling=self.coupling,
            prep_tail_tol=self.prep_tail_tol,
            evolve_tail_tol=self.evolve_tail_tol,
            rtol=self.rtol,
        )
        meta = {
            "probe": probe_to_string(self.probe),
            "cutoff": "" if self.cutoff is None else str(self.cutoff),
            "max_error_estimate": _fmt(float(np.max(curve.errors, initial=0.0))),
            "engines": ";".join(sorted(set(curve.engines))),
        }
        return TaskResult(self.filename, curve.to_csv(), meta)


@dataclass(frozen=True)
class RatioTask:
    filename: str
    n0: int
    bath: BathSpec
    t_grid: tuple[float, ...]

    def execute(self):
        curve = qfi_ratio_curve(self.n0, self.bath, self.t_grid)
        meta = {"temperature": _fmt(self.bath.temperature), "engines": "closed-form"}
        return TaskResult(self.filename, curve.to_csv(), meta)


@dataclass(frozen=True)
class FockVsSvsTask:
    """Two-curve comparison of a Fock probe against its energy-matched SVS."""

    filename: str
    n0: int
    bath: BathSpec
    t_grid: tuple[float, ...]
    cutoff: int

    def execute(self):
        fock = transient_qfi_curve(
            ProbeSpec.fock(self.n0), self.bath, "single", self.t_grid, cutoff=self.cutoff
        )
        svs = transient_qfi_curve(
            ProbeSpec.squeezed_vacuum(float(np.arcsinh(np.sqrt(self.n0)))),
            self.bath,
            "single",
            self.t_grid,
        )
        out = io.StringIO()
        out.write("t,fock,svs\n")
        for t, f_val, s_val in zip(self.t_grid, fock.values, svs.values):
            out.write(f"{_fmt(t)},{_fmt(f_val)},{_fmt(s_val)}\n")
        meta = {"cutoff": str(self.cutoff), "engines": "numeric-sld;closed-form"}
        return TaskResult(self.filename, out.getvalue(), meta)


@dataclass(frozen=True)
class ExactVsNumericTask:
    filename: str
    n0: int
    bath: BathSpec
    t_grid: tuple[float, ...]
    cutoff: int

    def execute(self):
        numeric = transient_qfi_curve(
            ProbeSpec.fock(self.n0),
            self.bath,
            "single",
            self.t_grid,
            cutoff=self.cutoff,
        )
        out = io.StringIO()
        out.write("t,exact,numeric_sld,rel_gap\n")
        worst = 0.0
        for t, num in zip(self.t_grid, numeric.values):
            exact = fock_qfi_exact(self.n0, self.bath, t)
            gap = abs(num - exact) / max(abs(exact), 1e-300)
            worst = max(worst, gap)
            out.write(f"{_fmt(t)},{_fmt(exact)},{_fmt(num)},{gap:.3g}\n")
        meta = {"cutoff": str(self.cutoff), "max_rel_gap": f"{worst:.3g}",
                "engines": "closed-form;numeric-sld"}
        return TaskResult(self.filename, out.getvalue(), meta)


@dataclass(frozen=True)
class EquilibriumSweepTask:
    filename: str
    omega: float
    sweep_name: str
    grid: tuple[float, ...]
    observables: tuple[str, ...]
    r_values: tuple[float, ...]
    temperatures: tuple[float, ...]

    def _series(self):
        fixed = self.r_values if self.sweep_name == "T" else self.temperatures
        for observable in self.observables:
            if observable == "quadrature-single" and self.sweep_name == "T":
                yield observable, None
                continue
            for value in fixed or (None,):
                if value is None:
                    yield observable, None
                elif self.sweep_name == "T":
                    yield f"{observable}[r={value:g}]", value
                else:
                    yield f"{observable}[T={value:g}]", value

    def execute(self):
        out = io.StringIO()
        out.write(f"{self.sweep_name},observable,value\n")
        for tag, fixed in self._series():
            observable = tag.split("[", 1)[0]
            func = _EQUILIBRIUM_DISPATCH[observable]
            for g in self.grid:
                if self.sweep_name == "T":
                    r, temp = fixed, g
                else:
                    r, temp = g, fixed
                value = func(self.omega, r, temp)
                out.write(f"{_fmt(g)},{tag},{_fmt(value)}\n")
        meta = {"omega": _fmt(self.omega), "engines": "closed-form"}
        return TaskResult(self.filename, out.getvalue(), meta)


@dataclass(frozen=True)
class KurtosisTask:
    filename: str
    probe: ProbeSpec
    bath: BathSpec
    t_grid: tuple[float, ...]
    cutoff: int
    prep_tail_tol: float = 1e-6
    evolve_tail_tol: float = 1e-5

    def execute(self):
        curve = kurtosis_trajectory(
            self.probe,
            self.bath,
            self.t_grid,
            cutoff=self.cutoff,
            prep_tail_tol=self.prep_tail_tol,
            evolve_tail_tol=self.evolve_tail_tol,
        )
        meta = {
            "probe": probe_to_string(self.probe),
            "temperature": _fmt(self.bath.temperature),
            "cutoff": str(self.cutoff),
            "engines": "numeric-sld",
        }
        return TaskResult(self.filename, curve.to_csv(), meta)


@dataclass(frozen=True)
class WignerTask:
    filename: str
    r: float
    nbar: float
    extent: float = 6.0
    points: int = 121

    def execute(self):
        state = GaussianState.squeezed_thermal(self.r, self.nbar)
        xs = np.linspace(-self.extent, self.extent, self.points)
        w = wigner_gaussian(state, xs, xs)
        out = io.StringIO()
        out.write("x,p,W\n")
        for i, x in enumerate(xs):
            for j, p in enumerate(xs):
                out.write(f"{_fmt(x)},{_fmt(p)},{_fmt(w[i, j])}\n")
        return TaskResult(self.filename, out.getvalue(), {"engines": "closed-form"})


@dataclass(frozen=True)
class PhotonVarianceTask:
    filename: str
    r_grid: tuple[float, ...]
    nbar: float
    cutoff: int = 200

    def execute(self):
        out = io.StringIO()
        out.write("r,variance\n")
        space = FockSpace(self.cutoff)
        for r in self.r_grid:
            state = prepare(space, ProbeSpec.squeezed_thermal(r, self.nbar))
            out.write(f"{_fmt(r)},{_fmt(photon_variance(state))}\n")
        return TaskResult(self.filename, out.getvalue(), {"engines": "numeric-sld"})


@dataclass(frozen=True)
class TaskResult:
    filename: str
    text: str
    meta: dict


def _execute(task):
    try:
        return task.execute()
    except ThermoprobeError as error:
        raise type(error)(f"[{task.filename}] {error}") from error


def _probe_label(probe: ProbeSpec, seen: dict) -> str:
    label = probe.family
    try:
        label += f"-{probe.param('parity')}"
    except KeyError:
        pass
    count = seen.get(label, 0)
    seen[label] = count + 1
    return label if count == 0 else f"{label}{count + 1}"


def _curve_cutoff(probe: ProbeSpec, base: int | None) -> int | None:
    if probe.family == "gkp":
        return max(base or 0, GKP_MIN_CUTOFF)
    return base


def compile_tasks(config: ExperimentConfig) -> list:
    """Expand a validated configuration into its ordered task list."""
    if config.kind == "figure":
        return _compile_figure(config)

    tasks = []
    if config.kind == "transient-qfi":
        seen: dict = {}
        loose = config.model == "two"
        for probe in config.probes:
            label = _probe_label(probe, seen)
            tasks.append(
                QfiCurveTask(
                    filename=f"qfi_{label}.csv",
                    probe=probe,
                    bath=config.bath,
                    model=config.model,
                    coupling=config.coupling,
                    t_grid=config.t_grid,
                    cutoff=_curve_cutoff(probe, config.cutoff),
                    rtol=config.tol * 1e-5,
                    prep_tail_tol=1e-2 if loose else 1e-6,
                    evolve_tail_tol=1e-2 if loose else 1e-5,
                    label=label,
                )
            )
        return tasks

    if config.kind == "ratio":
        n0 = config.probes[0].param("n0")
        temperatures = config.temperatures or (config.bath.temperature,)
        for temp in temperatures:
            bath = BathSpec(config.bath.omega, temp, config.bath.gamma)
            tasks.append(
                RatioTask(
                    filename=f"ratio_T{temp:g}.csv",
                    n0=n0,
                    bath=bath,
                    t_grid=config.t_grid,
                )
            )
        return tasks

    if config.kind == "equilibrium-cfi":
        return [
            EquilibriumSweepTask(
                filename="cfi_sweep.csv",
                omega=config.omega,
                sweep_name=config.sweep_name,
                grid=config.sweep_grid,
                observables=config.observables,
                r_values=config.r_values,
                temperatures=config.temperatures,
            )
        ]

    if config.kind == "diagnostics":
        seen = {}
        for probe in config.probes:
            label = _probe_label(probe, seen)
            for temp in config.temperatures or (config.bath.temperature,):
                bath = BathSpec(config.bath.omega, temp, config.bath.gamma)
                tasks.append(
                    KurtosisTask(
                        filename=f"kurtosis_{label}_T{temp:g}.csv",
                        probe=probe,
                        bath=bath,
                        t_grid=config.t_grid,
                        cutoff=_curve_cutoff(probe, config.cutoff or 60),
                    )
                )
        return tasks

    raise ConfigError(f"unknown experiment kind {config.kind!r}")


def _compile_figure(config: ExperimentConfig) -> list:
    fid = config.figure_id
    tasks = []
    if fid == 2:
        tasks.extend(
            compile_tasks(config.override(kind="transient-qfi", temperatures=()))
        )
        tasks.append(
            FockVsSvsTask(
                filename="qfi_fock_vs_svs.csv",
                n0=config.probes[0].param("n0"),
                bath=config.bath,
                t_grid=config.t_grid,
                cutoff=config.cutoff or 60,
            )
        )
        short_grid = tuple(t for t in config.t_grid if t > 0)
        for temp in config.temperatures:
            bath = BathSpec(config.bath.omega, temp, config.bath.gamma)
            tasks.append(
                RatioTask(
                    filename=f"ratio_T{temp:g}.csv",
                    n0=config.probes[0].param("n0"),
                    bath=bath,
                    t_grid=short_grid,
                )
            )
        return tasks
    if fid in (3, 4):
        return compile_tasks(config.override(kind="transient-qfi"))
    if fid == 5:
        # two-mode squeezed vacuum against its single-mode benchmark
        common = dict(
            bath=config.bath,
            t_grid=config.t_grid,
            rtol=config.tol * 1e-5,
        )
        return [
            QfiCurveTask(
                filename="qfi_tmsv.csv",
                probe=config.probes[0],
                model="two",
                coupling=config.coupling,
                cutoff=config.cutoff,
                prep_tail_tol=1e-3,
                evolve_tail_tol=1e-3,
                label="tmsv",
                **common,
            ),
            QfiCurveTask(
                filename="qfi_svs_single.csv",
                probe=config.probes[1],
                model="single",
                coupling=0.0,
                cutoff=None,
                label="svs-single",
                **common,
            ),
        ]
    if fid == 6:
        nbar_ref = 1.0 / np.expm1(config.omega / 0.1)
        return [
            EquilibriumSweepTask(
                filename="cfi_photon_number.csv",
                omega=config.omega,
                sweep_name="T",
                grid=config.sweep_grid,
                observables=("photon-number",),
                r_values=config.r_values,
                temperatures=(),
            ),
            WignerTask(filename="wigner_r0.5_T0.1.csv", r=0.5, nbar=nbar_ref),
            PhotonVarianceTask(
                filename="photon_variance_vs_r.csv",
                r_grid=tuple(np.linspace(0.0, 1.5, 31)),
                nbar=nbar_ref,
            ),
        ]
    if fid in (7, 8, 12):
        tasks = [
            EquilibriumSweepTask(
                filename="cfi_vs_T.csv",
                omega=config.omega,
                sweep_name="T",
                grid=config.sweep_grid,
                observables=(config.observables[0],),
                r_values=config.r_values,
                temperatures=(),
            )
        ]
        if len(config.observables) > 1:
            tasks.append(
                EquilibriumSweepTask(
                    filename="cfi_low_t_vs_r.csv",
                    omega=config.omega,
                    sweep_name="r",
                    grid=tuple(np.linspace(0.0, 0.98 * config.omega, 50)),
                    observables=(config.observables[1],),
                    r_values=(),
                    temperatures=(0.05, 0.1, 0.2),
                )
            )
        return tasks
    if fid == 9:
        return [
            ExactVsNumericTask(
                filename="fock6_exact_vs_numeric.csv",
                n0=6,
                bath=config.bath,
                t_grid=config.t_grid,
                cutoff=config.cutoff or 60,
            )
        ]
    if fid == 10:
        seen: dict = {}
        for probe in config.probes:
            label = _probe_label(probe, seen)
            for temp in config.temperatures:
                bath = BathSpec(config.bath.omega, temp, config.bath.gamma)
                tasks.append(
                    KurtosisTask(
                        filename=f"kurtosis_{label}_T{temp:g}.csv",
                        probe=probe,
                        bath=bath,
                        t_grid=config.t_grid,
                        cutoff=_curve_cutoff(probe, config.cutoff or 60),
                    )
                )
        return tasks
    if fid == 11:
        for temp in config.temperatures:
            bath = BathSpec(config.bath.omega, temp, config.bath.gamma)
            tasks.append(
                RatioTask(
                    filename=f"ratio_T{temp:g}.csv",
                    n0=config.probes[0].param("n0"),
                    bath=bath,
                    t_grid=config.t_grid,
                )
            )
        return tasks
    raise ConfigError(f"unknown figure id {fid}")


def list_figures() -> list[tuple[int, str]]:
    return [(fid, FIGURE_DESCRIPTIONS[fid]) for fid in figure_ids()]


def validate(config: ExperimentConfig) -> dict:
    """Precondition checks and parameter resolution, no engine work.

    Raises a typed error on the first violated precondition; returns a
    report of the resolved parameters otherwise.
    """
    report: dict = {"kind": config.kind, "label": config.label()}
    if config.kind == "figure":
        if config.figure_id not in FIGURE_DESCRIPTIONS:
            raise ConfigError(f"unknown figure id {config.figure_id}")
        report["figure"] = FIGURE_DESCRIPTIONS[config.figure_id]

    needs_bath = config.kind in ("transient-qfi", "ratio", "diagnostics") or (
        config.kind == "figure" and config.bath is not None
    )
    if config.kind in ("transient-qfi", "ratio", "diagnostics") and config.bath is None:
        raise ConfigError(f"{config.kind} requires a [bath] section")

    trajectory_kinds = ("transient-qfi", "ratio", "diagnostics")
    uses_time = config.kind in trajectory_kinds or (
        config.kind == "figure" and config.figure_id in (2, 3, 4, 5, 9, 10, 11)
    )
    if uses_time:
        if not config.t_grid:
            raise ConfigError("empty t grid")
        ts = np.asarray(config.t_grid)
        if np.any(ts < 0) or np.any(np.diff(ts) <= 0):
            raise ConfigError("t grid must be nonnegative and strictly increasing")

    if config.kind in ("transient-qfi", "diagnostics") and not config.probes:
        raise ConfigError("no probes configured")
    if config.kind == "ratio":
        if not config.probes or config.probes[0].family != "fock":
            raise ConfigError("ratio experiments take a fock probe")

    modes_needed = 2 if config.model == "two" else 1
    if config.kind in ("transient-qfi",) or (
        config.kind == "figure" and config.figure_id in (2, 3, 4)
    ):
        for probe in config.probes:
            required = probe.modes_required()
            if required is not None and required != modes_needed:
                raise ConfigError(
                    f"probe {probe.family} needs {required} mode(s), model has {modes_needed}"
                )

    equilibrium_like = config.kind == "equilibrium-cfi" or (
        config.kind == "figure" and config.figure_id in (6, 7, 8, 12)
    )
    if equilibrium_like:
        if not config.sweep_grid:
            raise ConfigError("equilibrium sweep needs a grid")
        two_mode_obs = [o for o in config.observables if o != "quadrature-single"]
        for r in config.r_values:
            if two_mode_obs or config.figure_id in (7, 8, 12):
                if r >= config.omega:
                    raise InstabilityError(
                        f"r = {r} >= omega = {config.omega}: unstable normal mode"
                    )
        if config.kind == "equilibrium-cfi" and not config.observables:
            raise ConfigError("no observables configured")

    if needs_bath and config.bath is not None:
        report["bath"] = (
            f"omega={config.bath.omega:g} T={config.bath.temperature:g} "
            f"gamma={config.bath.gamma:g}"
        )
    report["resolved_probes"] = [probe_to_string(p) for p in config.probes]
    report["tasks"] = [task.filename for task in compile_tasks(config)]
    return report


def _svg_for_csv(text: str) -> str | None:
    """A small deterministic polyline plot of numeric CSV columns vs column 0."""
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    try:
        xs = np.array([float(row[0]) for row in rows])
    except ValueError:
        return None
    series = []
    for col in range(1, len(header)):
        try:
            ys = np.array([float(row[col]) for row in rows])
        except ValueError:
            continue
        series.append((header[col], ys))
    if not series or xs.size < 2:
        return None
    width, height, margin = 640, 420, 50
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo = min(float(ys.min()) for _, ys in series)
    y_hi = max(float(ys.max()) for _, ys in series)
    if x_hi == x_lo or y_hi == y_lo:
        return None

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 12}" font-size="12" '
        f'text-anchor="middle">{header[0]}</text>',
    ]
    for k, (label, ys) in enumerate(series):
        color = palette[k % len(palette)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        parts.append(
            f'<text x="{width - margin + 4}" y="{margin + 14 * k + 10}" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def run(config: ExperimentConfig, *, out_dir: str | None = None,
        cutoff: int | None = None, tol: float | None = None,
        workers: int | None = None) -> dict:
    """Validate, execute, and write one experiment; returns the manifest."""
    if cutoff is not None:
        config = config.override(cutoff=cutoff)
    if tol is not None:
        config = config.override(tol=tol)
    if workers is not None:
        config = config.override(workers=workers)
    base = out_dir or os.environ.get(OUTPUT_DIR_ENV) or config.out_dir
    validate(config)
    tasks = compile_tasks(config)

    started = time.time()
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_execute, tasks))
    else:
        results = [_execute(task) for task in tasks]
    elapsed = time.time() - started

    target = Path(base) / config.label()
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for result in results:
        path = target / result.filename
        path.write_text(result.text, encoding="utf-8", newline="\n")
        written.append(str(path))
        if config.svg:
            svg = _svg_for_csv(result.text)
            if svg is not None:
                svg_path = path.with_suffix(".svg")
                svg_path.write_text(svg, encoding="utf-8", newline="\n")
                written.append(str(svg_path))

    config_text = config.to_text()
    manifest_lines = [
        f"config_hash = {hashlib.sha256(config_text.encode()).hexdigest()}",
        f"thermoprobe_version = {__version__}",
        f"numpy_version = {np.__version__}",
        f"elapsed_seconds = {elapsed:.3f}",
        f"workers = {config.workers}",
        f"tol = {config.tol!r}",
    ]
    for result in results:
        for key, value in sorted(result.meta.items()):
            manifest_lines.append(f"{result.filename}.{key} = {value}")
    manifest_lines.append("outputs = " + ";".join(Path(p).name for p in written))
    manifest_lines.append("")
    manifest_lines.append("# config")
    manifest_lines.extend("# " + line for line in config_text.rstrip().split("\n"))
    manifest_path = target / "manifest.txt"
    manifest_path.write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")

    return {
        "directory": str(target),
        "outputs": written,
        "manifest": str(manifest_path),
        "elapsed": elapsed,
    }


def run_figure(figure_id: int, overrides: dict | None = None, **kwargs) -> dict:
    return run(figure_config(figure_id, overrides), **kwargs)


def load_config(path: str) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    config = parse_config(text)
    if config.kind == "figure":
        preset = figure_config(config.figure_id, dict(config.figure_overrides))
        config = preset.override(
            cutoff=config.cutoff if config.cutoff is not None else preset.cutoff,
            tol=config.tol,
            workers=config.workers,
            out_dir=config.out_dir,
            svg=config.svg,
        )
    return config
