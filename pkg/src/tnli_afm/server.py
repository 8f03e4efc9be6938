"""Shared FastMCP server instance.

Tool modules import `mcp` from here and register their tools on it. This
avoids circular imports with main.py.
"""

from __future__ import annotations

import asyncio
import logging

from fastmcp import FastMCP
from fastmcp.server.lifespan import lifespan

from tnli_afm.config import Settings
from tnli_afm.errors import TnliError

logger = logging.getLogger(__name__)


@lifespan
async def experiment_lifespan(server: FastMCP):
    """Load the base experiment every tool call starts from."""
    from tnli_afm.experiment import load_experiment, paper_default

    settings = Settings.from_env()
    source = settings.config_path or "bundled paper_default"
    try:
        experiment = await asyncio.to_thread(load_experiment, settings.config_path)
    except TnliError as exc:
        logger.warning("Cannot load %s (%s). Using bundled paper_default.", source, exc)
        experiment = paper_default()
    else:
        logger.info("Base experiment loaded from %s.", source)

    yield {"experiment": experiment, "settings": settings}
    logger.info("Experiment context released.")


mcp = FastMCP(
    "tnli-afm",
    instructions=(
        "This server computes displacement noise budgets, squeezing and "
        "synthetic spectra for a cantilever read out by a truncated nonlinear "
        "interferometer. Parameters not passed to a tool come from the base "
        "experiment. Quantities accept unit strings such as '110 uW' or "
        "'40 mV'. tnli_reproduce writes files and is disabled in read-only mode."
    ),
    lifespan=experiment_lifespan,
)
