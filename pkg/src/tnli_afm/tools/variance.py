"""Squeezing and SNR calculator tools."""

from typing import Annotated, Any

from fastmcp.dependencies import Depends

from tnli_afm import tnli
from tnli_afm.models import Experiment
from tnli_afm.runner import variance_report
from tnli_afm.server import mcp
from tnli_afm.tools.server import compute, get_experiment, override, tool_errors
from tnli_afm.units import parse_quantity
from tnli_afm.utils import to_jsonable


@mcp.tool(
    tags={"read"},
    annotations={"readOnlyHint": True},
)
async def tnli_variance(
    gain: Annotated[float | None, "Amplifier gain G >= 1"] = None,
    eta: Annotated[float | None, "Detection efficiency in [0, 1]"] = None,
    theta_p: Annotated[str | float | None, "Probe homodyne angle, e.g. '0.5 pi'"] = None,
    theta_c: Annotated[str | float | None, "Conjugate homodyne angle"] = None,
    phi: Annotated[str | float | None, "Probe-arm phase shift"] = None,
    target_db: Annotated[float | None, "Also report the gain reaching this squeezing"] = None,
    experiment: Experiment = Depends(get_experiment),
) -> dict[str, Any]:
    """Dual-homodyne variance relative to shot noise, closed form and engine."""
    with tool_errors():
        experiment = override(
            experiment,
            {
                "optics.gain": gain,
                "optics.eta": eta,
                "optics.theta_p": theta_p,
                "optics.theta_c": theta_c,
                "optics.phi": phi,
            },
        )
    report = await compute(variance_report, experiment.optics, target_db)
    return to_jsonable(report)


@mcp.tool(
    tags={"read"},
    annotations={"readOnlyHint": True},
)
async def tnli_snr(
    displacement: Annotated[str | float, "Cantilever displacement, e.g. '10 pm' or meters"],
    gain: Annotated[float | None, "Amplifier gain G >= 1"] = None,
    experiment: Experiment = Depends(get_experiment),
) -> dict[str, Any]:
    """Signal-to-noise ratio of a cantilever displacement in the configured bandwidth."""
    with tool_errors():
        experiment = override(experiment, {"optics.gain": gain})
        meters = parse_quantity(displacement, "m")
    optics = experiment.optics
    snr = await compute(tnli.snr_db, optics, meters)
    return to_jsonable(
        {
            "snr_db": snr,
            "displacement_m": meters,
            "delta_f_hz": optics.delta_f,
            "gain": optics.gain,
            "topology": optics.topology,
        }
    )
