"""Shared fixtures for tool-level tests.

We swap the server's lifespan so every tool call starts from a known base
experiment instead of whatever TNLI_CONFIG points at.
"""

from __future__ import annotations

from collections.abc import AsyncIterator

import pytest
from fastmcp import FastMCP
from fastmcp.server.lifespan import lifespan

from tnli_afm.config import Settings
from tnli_afm.experiment import with_values
from tnli_afm.models import Experiment


@pytest.fixture
def base_experiment(bench) -> Experiment:
    """Default experiment with few averages so spectrum tools stay quick."""
    return with_values(bench, {"analyzer.averages": 2})


@pytest.fixture
def test_settings() -> Settings:
    return Settings(
        log_level="INFO", seed=7, jobs=2, config_path=None, read_only=False
    )


@pytest.fixture
def patched_mcp(base_experiment, test_settings):
    """Return the shared mcp with the base experiment injected via a test lifespan."""
    # Import main to trigger tool registration
    import tnli_afm.main  # noqa: F401
    from tnli_afm.server import mcp

    @lifespan
    async def _test_lifespan(server: FastMCP) -> AsyncIterator[dict]:
        yield {"experiment": base_experiment, "settings": test_settings}

    original_lifespan = mcp._lifespan
    mcp._lifespan = _test_lifespan
    yield mcp
    mcp._lifespan = original_lifespan
