"""Shared utilities for result formatting and name resolution."""

from tnli_afm.utils.formatting import summarize_trace, to_jsonable
from tnli_afm.utils.resolution import resolve_parameter, resolve_topology

__all__ = [
    "resolve_parameter",
    "resolve_topology",
    "summarize_trace",
    "to_jsonable",
]
