"""Main entry point for the tnli-afm tool server."""

from __future__ import annotations

import logging
import sys

from tnli_afm.config import Settings
from tnli_afm.server import mcp

logger = logging.getLogger(__name__)


def _register_tools() -> None:
    """Import tool modules to trigger registration on the shared server."""
    import tnli_afm.tools  # noqa: F401

    settings = Settings.from_env()
    if settings.read_only:
        mcp.disable(tags={"write"})
        logger.info("Read-only mode enabled. Write tools are disabled.")


# Register tools at import time so they exist before the server starts
_register_tools()


def run() -> None:
    """Run the MCP server (entry point for 'tnli-afm-mcp' command)."""
    settings = Settings.from_env()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    mcp.run()


if __name__ == "__main__":
    run()
