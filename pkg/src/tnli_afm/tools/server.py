"""Dependencies and helpers shared by the tool modules, and tool registration."""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Iterator, Mapping
from contextlib import contextmanager
from typing import Any, TypeVar

from fastmcp import Context
from fastmcp.dependencies import CurrentContext
from fastmcp.exceptions import ToolError

from tnli_afm.config import Settings
from tnli_afm.errors import TnliError
from tnli_afm.experiment import with_values
from tnli_afm.models import Experiment

T = TypeVar("T")


def get_experiment(ctx: Context = CurrentContext()) -> Experiment:
    """Dependency that provides the base experiment from lifespan context."""
    experiment = ctx.lifespan_context.get("experiment")
    if experiment is None:
        raise RuntimeError("Base experiment not available")
    return experiment


def get_settings(ctx: Context = CurrentContext()) -> Settings:
    """Dependency that provides the process settings from lifespan context."""
    return ctx.lifespan_context.get("settings") or Settings.from_env()


@contextmanager
def tool_errors() -> Iterator[None]:
    """Re-raise library errors as ToolError with the same message."""
    try:
        yield
    except TnliError as exc:
        raise ToolError(str(exc)) from exc


def override(experiment: Experiment, values: Mapping[str, Any]) -> Experiment:
    """Apply the non-None entries of ``values`` as dotted-path updates."""
    updates = {path: v for path, v in values.items() if v is not None}
    return with_values(experiment, updates) if updates else experiment


async def compute(func: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Execute a blocking calculation in a thread, translating library errors."""
    with tool_errors():
        return await asyncio.to_thread(func, *args, **kwargs)


# Import tool modules to register tools on the shared mcp instance
from tnli_afm.tools import budget, spectrum, sweeps, variance  # noqa: E402, F401
