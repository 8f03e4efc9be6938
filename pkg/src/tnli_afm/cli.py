"""Command-line front end (entry point for 'tnli-afm').

Examples:
  tnli-afm budget --lo-scale 100
  tnli-afm variance --set optics.gain=1.5 --set optics.eta=1
  tnli-afm sweep --param drive_amplitude --from "40 mV" --to "180 mV" --steps 8
  tnli-afm reproduce fig3 --seed 7 --out out/fig3
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from tnli_afm import __version__
from tnli_afm.config import Settings
from tnli_afm.errors import EXIT_OK, TnliError
from tnli_afm.experiment import apply_overrides, load_experiment, with_value
from tnli_afm.export import render_table_csv, write_json, write_table_csv
from tnli_afm.models import Experiment, Topology
from tnli_afm.noise_budget import NoiseBudget, budget_report
from tnli_afm.runner import (
    FIGURES,
    run_reproduce,
    run_spectrum,
    run_sweep,
    variance_report,
    write_spectrum,
)
from tnli_afm.units import format_si
from tnli_afm.utils.formatting import to_jsonable

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Experiment, Settings], int]


def _seed(experiment: Experiment, settings: Settings) -> int:
    seed = experiment.acquisition.seed
    return settings.seed if seed is None else seed


def _emit_json(path: str, payload: object) -> None:
    if path == "-":
        print(json.dumps(to_jsonable(payload), indent=2, sort_keys=True))
    else:
        write_json(path, payload)


# ---------------------------------------------------------------------------
# budget
# ---------------------------------------------------------------------------


def _budget_row(budget: NoiseBudget) -> list[str]:
    asd = "m/√Hz"
    return [
        budget.topology.value,
        format_si(budget.snl_asd, asd),
        format_si(budget.backaction_asd, asd),
        format_si(budget.sql_asd, asd),
        format_si(budget.squeezed_floor_asd, asd),
        format_si(budget.ratio_floor_asd, asd),
        format_si(budget.p_cantilever, "W"),
    ]


def cmd_budget(args: argparse.Namespace, experiment: Experiment, settings: Settings) -> int:
    topologies = [Topology(experiment.optics.topology)] if args.topology else list(Topology)
    budgets = [
        budget_report(
            experiment.optics.model_copy(update={"topology": topology}),
            experiment.cantilever,
            lo_scale=args.lo_scale,
        )
        for topology in topologies
    ]
    header = ["topology", "SNL", "backaction", "SQL", "squeezed", "ratio floor", "P cantilever"]
    rows = [header, *(_budget_row(b) for b in budgets)]
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    for row in rows:
        print("  ".join(cell.ljust(width) for cell, width in zip(row, widths, strict=True)))
    print(f"P_tot = {format_si(budgets[0].p_tot, 'W')}, noise ratio {budgets[0].noise_ratio:.4f}")
    for note in budgets[0].notes:
        print(f"note: {note}")
    if args.json:
        _emit_json(args.json, [budget.to_report() for budget in budgets])
    return EXIT_OK


# ---------------------------------------------------------------------------
# variance
# ---------------------------------------------------------------------------


def cmd_variance(args: argparse.Namespace, experiment: Experiment, settings: Settings) -> int:
    report = variance_report(experiment.optics, target_db=args.target_db)
    print(f"topology          {report.topology.value}")
    print(f"gain              {report.gain:.6g} (r = {report.r:.6g})")
    print(f"eta               {report.eta:.6g}")
    print(f"closed form       {report.formula_variance:.12g}")
    print(f"engine            {report.engine_variance:.12g}")
    print(f"difference        {report.difference:.3e}")
    print(f"below SNL         {report.squeezing_db:.4f} dB")
    if report.gain_for_target is not None:
        print(f"gain for {report.target_db:g} dB   {report.gain_for_target:.6g}")
    for note in report.notes:
        print(f"note: {note}")
    if args.json:
        _emit_json(args.json, report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def cmd_sweep(args: argparse.Namespace, experiment: Experiment, settings: Settings) -> int:
    seed = _seed(experiment, settings)
    result = asyncio.run(
        run_sweep(
            experiment,
            args.param,
            args.start,
            args.stop,
            args.steps,
            log=args.log,
            jobs=args.jobs or settings.jobs,
            monte_carlo=args.monte_carlo,
            seed=seed if args.monte_carlo else None,
        )
    )
    metadata = {"tool_version": __version__, "parameter": result.parameter}
    if result.seed is not None:
        metadata["seed"] = result.seed
    if args.out:
        path = write_table_csv(args.out, result.columns, result.rows, metadata)
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(render_table_csv(result.columns, result.rows, metadata))
    return EXIT_OK


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def cmd_spectrum(args: argparse.Namespace, experiment: Experiment, settings: Settings) -> int:
    if args.drive is not None:
        experiment = with_value(experiment, "cantilever.drive_amplitude", args.drive)
    seed = _seed(experiment, settings)
    run = run_spectrum(experiment, seed)
    manifest = write_spectrum(run, experiment, Path(args.out))
    print(f"floor             {run.floor_db:.3f} dB rel. SNL")
    print(f"SNR               {run.snr_db:.3f} dB (model {run.analytic_snr_db:.3f} dB)")
    print(f"seed              {seed}")
    logger.info("Wrote %s", manifest)
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------


def cmd_reproduce(args: argparse.Namespace, experiment: Experiment, settings: Settings) -> int:
    seed = _seed(experiment, settings)
    result = asyncio.run(
        run_reproduce(
            experiment, args.figure, seed, args.out, jobs=args.jobs or settings.jobs
        )
    )
    print(f"{result.figure}: {result.topology.value} on cantilever, G = {result.gain:.4f}")
    print(f"squeezed floor    {result.squeezed_floor_db:.3f} dB rel. SNL")
    print(f"coherent floor    {result.coherent_floor_db:.3f} dB rel. SNL")
    for row in result.rows:
        print(f"{row[0]:5.0f} mV  SNR {row[2]:7.2f} dB squeezed, {row[3]:7.2f} dB coherent")
    print(f"SNR slope         {result.snr_slope:.3f} dB/dB")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _experiment_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Experiment TOML file or run manifest.")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help='Repeatable override, e.g. --set optics.eta=0.8 --set "optics.p_lo_probe=1 mW".',
    )
    common.add_argument(
        "--topology",
        default=None,
        help="Which beam is reflected from the cantilever: probe, lo or dual.",
    )
    common.add_argument("--seed", type=int, default=None, help="Seed for stochastic output.")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnli-afm",
        description="Noise budgets and synthetic spectra for quantum-enhanced cantilever readout.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only.")

    common = _experiment_options()
    sub = parser.add_subparsers(dest="command", required=True)

    budget = sub.add_parser("budget", parents=[common], help="Displacement noise budget.")
    budget.add_argument("--lo-scale", type=float, default=1.0, help="Multiply both LO powers.")
    budget.add_argument("--json", default=None, metavar="PATH", help="Also write JSON ('-' for stdout).")
    budget.set_defaults(handler=cmd_budget)

    variance = sub.add_parser("variance", parents=[common], help="Closed form vs engine variance.")
    variance.add_argument("--target-db", type=float, default=None, help="Report the gain reaching this squeezing.")
    variance.add_argument("--json", default=None, metavar="PATH", help="Also write JSON ('-' for stdout).")
    variance.set_defaults(handler=cmd_variance)

    sweep = sub.add_parser("sweep", parents=[common], help="Step one parameter, emit CSV.")
    sweep.add_argument("--param", required=True, help="Dotted path or unambiguous field name.")
    sweep.add_argument("--from", dest="start", required=True, help="First value, units allowed.")
    sweep.add_argument("--to", dest="stop", required=True, help="Last value, units allowed.")
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--log", action="store_true", help="Logarithmic spacing.")
    sweep.add_argument("--jobs", type=int, default=None, help="Parallel steps (default TNLI_JOBS).")
    sweep.add_argument("--monte-carlo", action="store_true", help="Add synthesized-spectrum columns.")
    sweep.add_argument("--out", default=None, help="CSV path (default stdout).")
    sweep.set_defaults(handler=cmd_sweep)

    spectrum = sub.add_parser("spectrum", parents=[common], help="Acquire one averaged trace.")
    spectrum.add_argument("--drive", default=None, help='Drive amplitude, e.g. "40 mV".')
    spectrum.add_argument("--out", required=True, help="Output directory.")
    spectrum.set_defaults(handler=cmd_spectrum)

    reproduce = sub.add_parser("reproduce", parents=[common], help="Synthesize a drive series.")
    reproduce.add_argument("figure", choices=sorted(FIGURES))
    reproduce.add_argument("--out", required=True, help="Output directory.")
    reproduce.add_argument("--jobs", type=int, default=None, help="Parallel traces (default TNLI_JOBS).")
    reproduce.set_defaults(handler=cmd_reproduce)

    return parser


def _configure_logging(settings: Settings, verbose: bool, quiet: bool) -> None:
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    settings = Settings.from_env()
    _configure_logging(settings, args.verbose, args.quiet)

    try:
        experiment = apply_overrides(
            load_experiment(args.config), args.set, topology=args.topology, seed=args.seed
        )
        return args.handler(args, experiment, settings)
    except TnliError as exc:
        logger.error("%s", exc)
        return exc.exit_code


def run() -> None:
    """Entry point for the 'tnli-afm' command."""
    raise SystemExit(main())


if __name__ == "__main__":
    run()
