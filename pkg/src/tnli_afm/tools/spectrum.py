"""Monte Carlo spectrum tools."""

from pathlib import Path
from typing import Annotated, Any

from fastmcp.dependencies import Depends

from tnli_afm.config import Settings
from tnli_afm.models import Experiment
from tnli_afm.runner import run_reproduce, run_spectrum
from tnli_afm.server import mcp
from tnli_afm.tools.server import (
    compute,
    get_experiment,
    get_settings,
    override,
    tool_errors,
)
from tnli_afm.utils import summarize_trace, to_jsonable


def _seed(experiment: Experiment, settings: Settings, seed: int | None) -> int:
    if seed is not None:
        return seed
    if experiment.acquisition.seed is not None:
        return experiment.acquisition.seed
    return settings.seed


@mcp.tool(
    tags={"read"},
    annotations={"readOnlyHint": True},
)
async def tnli_spectrum(
    drive_mv: Annotated[float | None, "Piezo drive amplitude in millivolts"] = None,
    seed: Annotated[int | None, "Seed for the synthesized records"] = None,
    experiment: Experiment = Depends(get_experiment),
    settings: Settings = Depends(get_settings),
) -> dict[str, Any]:
    """Synthesize one averaged analyzer trace and report its floor and tone SNR."""
    with tool_errors():
        experiment = override(
            experiment,
            {"cantilever.drive_amplitude": None if drive_mv is None else drive_mv * 1e-3},
        )
    run = await compute(run_spectrum, experiment, _seed(experiment, settings, seed))
    f_drive = experiment.cantilever.drive_freq
    return to_jsonable(
        {
            "floor_db_rel_snl": run.floor_db,
            "snr_db": run.snr_db,
            "analytic_snr_db": run.analytic_snr_db,
            "trace": summarize_trace(run.trace, f_drive),
        }
    )


@mcp.tool(
    tags={"write"},
    annotations={"destructiveHint": False, "readOnlyHint": False},
)
async def tnli_reproduce(
    figure: Annotated[str, "fig2 (probe on cantilever) or fig3 (LO on cantilever)"],
    out_dir: Annotated[str, "Directory to write traces, SNR table and manifest into"],
    seed: Annotated[int | None, "Seed for the synthesized records"] = None,
    experiment: Experiment = Depends(get_experiment),
    settings: Settings = Depends(get_settings),
) -> dict[str, Any]:
    """Write a five-level drive series with squeezed and coherent traces."""
    with tool_errors():
        result = await run_reproduce(
            experiment,
            figure,
            _seed(experiment, settings, seed),
            Path(out_dir),
            jobs=settings.jobs,
        )
    return to_jsonable(
        {
            "figure": result.figure,
            "gain": result.gain,
            "squeezed_floor_db_rel_snl": result.squeezed_floor_db,
            "coherent_floor_db_rel_snl": result.coherent_floor_db,
            "snr_slope_db_per_db": result.snr_slope,
            "outputs": [p.as_posix() for p in result.outputs],
            "notes": list(result.notes),
        }
    )
