"""Scenario execution shared by the CLI and the tool server.

Blocking numerical work runs in worker threads via ``asyncio.to_thread``;
fan-out is bounded by a semaphore and results are always returned in
submission order.
"""

from __future__ import annotations

import asyncio
import logging
import math
from collections.abc import Awaitable, Callable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from tnli_afm import tnli
from tnli_afm.constants import SNR_FLOOR_DB
from tnli_afm.errors import InvalidArgumentError, NumericalError
from tnli_afm.experiment import (
    get_value,
    settable_paths,
    sweepable_paths,
    with_value,
    with_values,
)
from tnli_afm.export import (
    RunManifest,
    ensure_output_dir,
    trace_metadata,
    write_json,
    write_manifest,
    write_table_csv,
    write_trace,
)
from tnli_afm.models import Experiment, TnliConfig, Topology
from tnli_afm.noise_budget import budget_report
from tnli_afm.spectrum import SpectrumTrace, acquire_trace, extract_snr, floor_db
from tnli_afm.utils.resolution import resolve_parameter

logger = logging.getLogger(__name__)

T = TypeVar("T")

FIGURES: dict[str, Topology] = {
    "fig2": Topology.PROBE_ON_CANTILEVER,
    "fig3": Topology.LO_ON_CANTILEVER,
}
DRIVE_LEVELS_MV = (40.0, 75.0, 110.0, 145.0, 180.0)
# Centre of the 2.8-3.0 dB squeezing seen with the LO on the cantilever
REPRODUCE_TARGET_DB = 2.9

# Stream offsets keeping every trace of a reproduction independent
_COHERENT_STREAM = 100
_FLOOR_STREAM = 200

GAP_NOTES = (
    "intensity-difference contamination of the squeezed/coherent SNR gap is not modelled",
    "absolute SNR depends on the photon-flux normalisation; gaps between runs do not",
)


async def gather_bounded(
    calls: Sequence[Callable[[], T]], jobs: int = 1
) -> list[T]:
    """Run blocking callables in threads, at most ``jobs`` at a time, in order."""
    if jobs < 1:
        raise InvalidArgumentError(f"jobs must be >= 1, got {jobs}")
    semaphore = asyncio.Semaphore(jobs)

    async def _bounded(call: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(call)

    tasks: list[Awaitable[T]] = [_bounded(call) for call in calls]
    return list(await asyncio.gather(*tasks))


# ---------------------------------------------------------------------------
# variance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceReport:
    """Closed-form and engine variance of the dual-homodyne observable."""

    topology: Topology
    gain: float
    r: float
    eta: float
    formula_variance: float
    engine_variance: float
    difference: float
    squeezing_db: float
    ideal_variance: float
    target_db: float | None = None
    gain_for_target: float | None = None
    notes: tuple[str, ...] = ()


def variance_report(config: TnliConfig, target_db: float | None = None) -> VarianceReport:
    """Evaluate the closed form against the covariance engine for ``config``.

    With ``target_db`` the report also carries the gain that reaches that
    squeezing at the configured efficiency and angles, or a note when it is
    out of reach.
    """
    formula = tnli.dual_homodyne_variance(
        config.r, config.eta, config.theta_p, config.theta_c, config.phi
    )
    engine = tnli.build_scene(config).stats().variance
    notes: list[str] = []
    if config.topology is not Topology.LO_ON_CANTILEVER:
        notes.append(
            "engine variance includes the cantilever reflectivity loss; "
            "the closed form does not"
        )

    gain_for_target = None
    if target_db is not None:
        try:
            gain_for_target = tnli.r_to_gain(
                tnli.r_for_target_db(
                    target_db, config.eta, config.theta_p, config.theta_c, config.phi
                )
            )
        except InvalidArgumentError as exc:
            notes.append(str(exc))

    return VarianceReport(
        topology=config.topology,
        gain=config.gain,
        r=config.r,
        eta=config.eta,
        formula_variance=formula,
        engine_variance=engine,
        difference=engine - formula,
        squeezing_db=tnli.squeezing_db(engine),
        ideal_variance=tnli.ideal_noise_ratio(config.gain),
        target_db=target_db,
        gain_for_target=gain_for_target,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "step",
    "value",
    "gain",
    "r",
    "eta",
    "variance_formula",
    "variance_engine",
    "squeezing_db",
    "snr_db",
    "snl_asd",
    "backaction_asd",
    "sql_asd",
    "squeezed_floor_asd",
)
MONTE_CARLO_COLUMNS = ("mc_floor_db", "mc_snr_db")


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]]
    seed: int | None = None

    def column(self, name: str) -> list[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def sweep_values(start: float, stop: float, steps: int, log: bool = False) -> np.ndarray:
    """Evenly spaced (or log-spaced) sweep points, endpoints included.

    Raises:
        InvalidArgumentError: For fewer than two steps, or non-positive
            endpoints on a log sweep.
    """
    if steps < 2:
        raise InvalidArgumentError(f"a sweep needs at least 2 steps, got {steps}")
    if log:
        if not (start > 0 and stop > 0):
            raise InvalidArgumentError("log sweeps need positive endpoints")
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def _si_value(experiment: Experiment, path: str, raw: Any) -> float:
    """``raw`` (number or unit string) in SI units of the parameter at ``path``."""
    return float(get_value(with_value(experiment, path, raw), path))


def _sweep_point(
    experiment: Experiment, step: int, value: float, monte_carlo: bool, seed: int
) -> tuple[Any, ...]:
    logger.debug("sweep step %d: value %g", step, value)
    optics, cantilever = experiment.optics, experiment.cantilever
    scene = tnli.build_scene(optics)
    engine = scene.stats().variance
    try:
        snr = tnli.snr_db(optics, cantilever.drive_displacement)
    except NumericalError as exc:
        logger.warning("sweep step %d: %s", step, exc)
        snr = math.nan
    budget = budget_report(optics, cantilever)

    row: tuple[Any, ...] = (
        step,
        value,
        optics.gain,
        optics.r,
        optics.eta,
        tnli.dual_homodyne_variance(
            optics.r, optics.eta, optics.theta_p, optics.theta_c, optics.phi
        ),
        engine,
        tnli.squeezing_db(engine),
        snr,
        budget.snl_asd,
        budget.backaction_asd,
        budget.sql_asd,
        budget.squeezed_floor_asd,
    )
    if monte_carlo:
        trace = acquire_trace(
            scene,
            cantilever,
            experiment.analyzer,
            experiment.acquisition,
            seed,
            stream=step,
        )
        f_drive = cantilever.drive_freq
        mc_snr = extract_snr(trace, f_drive) if cantilever.drive_displacement > 0 else math.nan
        row += (floor_db(trace, f_drive), mc_snr)
    logger.debug("sweep step %d done", step)
    return row


async def run_sweep(
    experiment: Experiment,
    parameter: str,
    start: float | str,
    stop: float | str,
    steps: int,
    *,
    log: bool = False,
    jobs: int = 1,
    monte_carlo: bool = False,
    seed: int | None = None,
) -> SweepResult:
    """Step one parameter and evaluate every output at each point.

    Endpoints may carry units (``"40 mV"``). Rows are ordered by step
    regardless of completion order.

    Raises:
        ConfigError: If ``parameter`` is unknown or not numeric.
        InvalidArgumentError: For fewer than two steps.
    """
    path = resolve_parameter(parameter, settable_paths())
    if path not in sweepable_paths():
        raise InvalidArgumentError(
            f"'{path}' cannot be swept. Available: {', '.join(sweepable_paths())}"
        )
    values = sweep_values(
        _si_value(experiment, path, start), _si_value(experiment, path, stop), steps, log
    )
    integral = isinstance(get_value(experiment, path), int)
    if monte_carlo and seed is None:
        raise InvalidArgumentError("Monte Carlo sweeps need a seed")

    points = [
        with_value(experiment, path, round(v) if integral else float(v)) for v in values
    ]
    calls = [
        (lambda exp=exp, i=i, v=v: _sweep_point(exp, i, float(v), monte_carlo, seed or 0))
        for i, (exp, v) in enumerate(zip(points, values, strict=True))
    ]
    logger.info("sweeping %s over %d steps (%d jobs)", path, steps, jobs)
    rows = await gather_bounded(calls, jobs)
    columns = SWEEP_COLUMNS + (MONTE_CARLO_COLUMNS if monte_carlo else ())
    return SweepResult(parameter=path, columns=columns, rows=rows, seed=seed)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumRun:
    trace: SpectrumTrace
    floor_db: float
    snr_db: float
    analytic_snr_db: float
    seed: int


def analytic_trace_snr(experiment: Experiment) -> float:
    """SNR the analyzer should show: the model SNR evaluated at ``delta_f = RBW``."""
    optics = experiment.optics.model_copy(update={"delta_f": experiment.analyzer.rbw})
    return tnli.snr_db(optics, experiment.cantilever.drive_displacement)


def run_spectrum(experiment: Experiment, seed: int, stream: int = 0) -> SpectrumRun:
    """Acquire one averaged trace at the configured drive."""
    scene = tnli.build_scene(experiment.optics)
    trace = acquire_trace(
        scene,
        experiment.cantilever,
        experiment.analyzer,
        experiment.acquisition,
        seed,
        stream=stream,
    )
    f_drive = experiment.cantilever.drive_freq
    driven = experiment.cantilever.drive_displacement > 0
    return SpectrumRun(
        trace=trace,
        floor_db=floor_db(trace, f_drive),
        snr_db=extract_snr(trace, f_drive) if driven else SNR_FLOOR_DB,
        analytic_snr_db=analytic_trace_snr(experiment),
        seed=seed,
    )


def write_spectrum(run: SpectrumRun, experiment: Experiment, out_dir: Path) -> Path:
    """Write ``spectrum.csv``/``.json`` and a manifest into ``out_dir``."""
    out_dir = ensure_output_dir(out_dir)
    metadata = trace_metadata(
        run.trace,
        topology=experiment.optics.topology.value,
        gain=experiment.optics.gain,
        drive_mv=experiment.cantilever.drive_amplitude * 1e3,
        floor_db_rel_snl=run.floor_db,
        snr_db=run.snr_db,
    )
    outputs = write_trace(out_dir, "spectrum", run.trace, metadata)
    pinned = with_value(experiment, "acquisition.seed", run.seed)
    manifest = RunManifest.for_run("spectrum", pinned, run.seed, outputs, out_dir)
    return write_manifest(out_dir, manifest)


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------

SNR_COLUMNS = (
    "drive_mv",
    "displacement_m",
    "snr_squeezed_db",
    "snr_coherent_db",
    "snr_gap_db",
    "analytic_snr_squeezed_db",
    "analytic_snr_coherent_db",
)


@dataclass(frozen=True)
class ReproduceResult:
    figure: str
    topology: Topology
    gain: float
    r: float
    squeezed_floor_db: float
    coherent_floor_db: float
    rows: list[tuple[float, ...]]
    snr_slope: float
    seed: int
    outputs: list[Path] = field(default_factory=list)
    notes: tuple[str, ...] = GAP_NOTES

    def column(self, name: str) -> list[float]:
        index = SNR_COLUMNS.index(name)
        return [row[index] for row in self.rows]


def figure_experiment(experiment: Experiment, figure: str) -> Experiment:
    """Experiment for one reproduction: its topology, at the squeezing target gain.

    Both figures share the gain that puts the LO-on-cantilever floor at
    ``REPRODUCE_TARGET_DB`` for the configured efficiency.

    Raises:
        InvalidArgumentError: For an unknown figure.
    """
    if figure not in FIGURES:
        raise InvalidArgumentError(
            f"No figure matching '{figure}'. Available: {', '.join(FIGURES)}"
        )
    optics = experiment.optics
    r = tnli.r_for_target_db(
        REPRODUCE_TARGET_DB, optics.eta, optics.theta_p, optics.theta_c, optics.phi
    )
    return with_values(
        experiment,
        {"optics.gain": tnli.r_to_gain(r), "optics.topology": FIGURES[figure].value},
    )


def _coherent(experiment: Experiment) -> Experiment:
    return with_value(experiment, "optics.gain", 1.0)


def _driven(experiment: Experiment, drive_mv: float) -> Experiment:
    return with_value(experiment, "cantilever.drive_amplitude", drive_mv * 1e-3)


def snr_slope(drive_mv: Sequence[float], snr_db: Sequence[float]) -> float:
    """Least-squares slope of SNR (dB) against ``10 log10`` of the drive voltage."""
    x = 10.0 * np.log10(np.asarray(drive_mv, dtype=np.float64))
    return float(np.polyfit(x, np.asarray(snr_db, dtype=np.float64), 1)[0])


async def run_reproduce(
    experiment: Experiment,
    figure: str,
    seed: int,
    out_dir: str | Path,
    *,
    jobs: int = 1,
) -> ReproduceResult:
    """Synthesize the drive series of one figure and write it to ``out_dir``.

    Emits a squeezed and a coherent trace per drive level, undriven
    squeezed and coherent floor traces, ``snr.csv``, ``summary.json`` and
    ``manifest.json``.

    Raises:
        ConfigIOError: If ``out_dir`` cannot be written.
    """
    out_dir = ensure_output_dir(out_dir)
    squeezed = figure_experiment(experiment, figure)
    coherent = _coherent(squeezed)

    jobs_list: list[tuple[str, Experiment, int]] = []
    for i, mv in enumerate(DRIVE_LEVELS_MV):
        jobs_list.append((f"squeezed_{mv:03.0f}mV", _driven(squeezed, mv), i))
        jobs_list.append(
            (f"coherent_{mv:03.0f}mV", _driven(coherent, mv), _COHERENT_STREAM + i)
        )
    jobs_list.append(("floor_squeezed", _driven(squeezed, 0.0), _FLOOR_STREAM))
    jobs_list.append(("floor_coherent", _driven(coherent, 0.0), _FLOOR_STREAM + 1))

    logger.info(
        "reproducing %s: G=%.4f, %d traces, seed %d",
        figure,
        squeezed.optics.gain,
        len(jobs_list),
        seed,
    )
    runs = await gather_bounded(
        [
            (lambda exp=exp, stream=stream: run_spectrum(exp, seed, stream))
            for _, exp, stream in jobs_list
        ],
        jobs,
    )
    by_name = {name: run for (name, _, _), run in zip(jobs_list, runs, strict=True)}

    outputs: list[Path] = []
    for (name, exp, stream), run in zip(jobs_list, runs, strict=True):
        metadata = trace_metadata(
            run.trace,
            figure=figure,
            topology=exp.optics.topology.value,
            gain=exp.optics.gain,
            drive_mv=exp.cantilever.drive_amplitude * 1e3,
            stream=stream,
        )
        outputs += write_trace(out_dir, name, run.trace, metadata)

    squeezed_floor = floor_db(by_name["floor_squeezed"].trace)
    coherent_floor = floor_db(by_name["floor_coherent"].trace)

    rows: list[tuple[float, ...]] = []
    for mv in DRIVE_LEVELS_MV:
        sq = by_name[f"squeezed_{mv:03.0f}mV"]
        coh = by_name[f"coherent_{mv:03.0f}mV"]
        rows.append(
            (
                mv,
                _driven(squeezed, mv).cantilever.drive_displacement,
                sq.snr_db,
                coh.snr_db,
                sq.snr_db - coh.snr_db,
                sq.analytic_snr_db,
                coh.analytic_snr_db,
            )
        )
    slope = snr_slope(DRIVE_LEVELS_MV, [row[2] for row in rows])

    table_meta = {
        "figure": figure,
        "seed": seed,
        "gain": squeezed.optics.gain,
        "squeezed_floor_db_rel_snl": squeezed_floor,
        "coherent_floor_db_rel_snl": coherent_floor,
    }
    outputs.append(write_table_csv(out_dir / "snr.csv", SNR_COLUMNS, rows, table_meta))

    result = ReproduceResult(
        figure=figure,
        topology=squeezed.optics.topology,
        gain=squeezed.optics.gain,
        r=squeezed.optics.r,
        squeezed_floor_db=squeezed_floor,
        coherent_floor_db=coherent_floor,
        rows=rows,
        snr_slope=slope,
        seed=seed,
    )
    outputs.append(
        write_json(
            out_dir / "summary.json",
            {
                "figure": figure,
                "topology": result.topology,
                "gain": result.gain,
                "r": result.r,
                "squeezed_floor_db_rel_snl": squeezed_floor,
                "coherent_floor_db_rel_snl": coherent_floor,
                "snr_slope_db_per_db": slope,
                "columns": SNR_COLUMNS,
                "rows": rows,
                "notes": result.notes,
            },
        )
    )

    pinned = with_value(experiment, "acquisition.seed", seed)
    manifest = RunManifest.for_run(
        "reproduce", pinned, seed, outputs, out_dir, figure=figure
    )
    outputs.append(write_manifest(out_dir, manifest))
    logger.info(
        "%s: squeezed floor %.2f dB, coherent floor %.2f dB, wrote %d files to %s",
        figure,
        squeezed_floor,
        coherent_floor,
        len(outputs),
        out_dir,
    )
    return replace(result, outputs=outputs)
