"""Tool-server tools over the calculators and the spectrum engine."""

from tnli_afm.tools import server as _server  # noqa: F401
