"""Name resolution for human-friendly parameter and topology names."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from typing import TypeVar

from tnli_afm.errors import ConfigError

T = TypeVar("T")


def resolve_topology(name: str, aliases: Mapping[str, T]) -> T:
    """Resolve a topology name or alias (case-insensitive) to its value.

    Args:
        name: e.g. ``"lo"``, ``"LoOnCantilever"`` or ``"lo_on_cantilever"``.
        aliases: Mapping of accepted lower-case spellings to values.

    Raises:
        ConfigError: If no alias matches.
    """
    key = str(name).strip().lower().replace("_", "").replace("-", "")
    for alias, value in aliases.items():
        if alias.replace("_", "").replace("-", "") == key:
            return value
    raise ConfigError(
        f"No topology matching '{name}'. Available: {', '.join(sorted(aliases))}"
    )


def resolve_parameter(name: str, paths: Iterable[str]) -> str:
    """Resolve a dotted parameter path, or an unambiguous bare field name.

    ``"eta"`` resolves to ``"optics.eta"`` as long as no other section has
    an ``eta`` field.

    Args:
        name: Dotted path (``"cantilever.drive_amplitude"``) or bare field name.
        paths: All valid dotted paths.

    Returns:
        The matching dotted path.

    Raises:
        ConfigError: If nothing matches or a bare name is ambiguous.
    """
    available = sorted(paths)
    if name in available:
        return name

    matches = [p for p in available if p.rsplit(".", 1)[-1] == name]
    if len(matches) == 0:
        raise ConfigError(
            f"No parameter matching '{name}'. Available: {', '.join(available)}",
            field_path=name,
        )
    if len(matches) > 1:
        raise ConfigError(
            f"Ambiguous parameter '{name}' matches multiple: "
            f"{', '.join(matches)}. Use the dotted path instead.",
            field_path=name,
        )
    return matches[0]
