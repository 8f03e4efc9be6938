"""Parameter sweep tool."""

from typing import Annotated, Any

from fastmcp.dependencies import Depends

from tnli_afm.config import Settings
from tnli_afm.models import Experiment
from tnli_afm.runner import run_sweep
from tnli_afm.server import mcp
from tnli_afm.tools.server import get_experiment, get_settings, tool_errors
from tnli_afm.utils import to_jsonable


@mcp.tool(
    tags={"read"},
    annotations={"readOnlyHint": True},
)
async def tnli_sweep(
    param: Annotated[str, "Dotted path (optics.eta) or unambiguous field name"],
    start: Annotated[str | float, "First value, units allowed"],
    stop: Annotated[str | float, "Last value, units allowed"],
    steps: Annotated[int, "Number of points, at least 2"],
    log: Annotated[bool, "Logarithmic spacing"] = False,
    experiment: Experiment = Depends(get_experiment),
    settings: Settings = Depends(get_settings),
) -> dict[str, Any]:
    """Step one parameter and return every computed output per step."""
    with tool_errors():
        result = await run_sweep(
            experiment, param, start, stop, steps, log=log, jobs=settings.jobs
        )
    return to_jsonable(
        {"parameter": result.parameter, "columns": result.columns, "rows": result.rows}
    )
