"""Noise budget tools."""

from typing import Annotated, Any

from fastmcp.dependencies import Depends

from tnli_afm.models import Experiment, Topology
from tnli_afm.noise_budget import budget_report
from tnli_afm.server import mcp
from tnli_afm.tools.server import compute, get_experiment, override, tool_errors


@mcp.tool(
    tags={"read"},
    annotations={"readOnlyHint": True},
)
async def tnli_noise_budget(
    topology: Annotated[
        str | None, "probe, lo or dual; omit for all three topologies"
    ] = None,
    lo_scale: Annotated[float, "Factor applied to both LO powers"] = 1.0,
    experiment: Experiment = Depends(get_experiment),
) -> dict[str, Any]:
    """Shot noise, backaction, SQL and squeezed displacement floors in m/sqrt(Hz)."""
    with tool_errors():
        if topology is not None:
            experiment = override(experiment, {"optics.topology": topology})
    topologies = [experiment.optics.topology] if topology else list(Topology)

    budgets = []
    for t in topologies:
        optics = experiment.optics.model_copy(update={"topology": t})
        budgets.append(
            await compute(budget_report, optics, experiment.cantilever, lo_scale)
        )
    return {
        "summary": {
            "p_tot_w": budgets[0].p_tot,
            "noise_ratio": budgets[0].noise_ratio,
            "notes": list(budgets[0].notes),
        },
        "items": [budget.to_report() for budget in budgets],
    }
