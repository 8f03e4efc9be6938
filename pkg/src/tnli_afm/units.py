"""Unit-suffixed quantities (``"110 uW"``, ``"795 nm"``, ``"0.5 pi"``) to SI floats."""

from __future__ import annotations

import math
import re
from collections.abc import Callable
from typing import Any

from tnli_afm.errors import InvalidArgumentError

_PREFIXES: dict[str, float] = {
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,
    "μ": 1e-6,
    "m": 1e-3,
    "": 1.0,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
}

# dimension -> accepted base symbols and their SI factor
_UNITS: dict[str, dict[str, float]] = {
    "": {"": 1.0, "%": 1e-2},
    "W": {"W": 1.0},
    "m": {"m": 1.0},
    "Hz": {"Hz": 1.0},
    "s": {"s": 1.0},
    "V": {"V": 1.0},
    "N/m": {"N/m": 1.0},
    "m/V": {"m/V": 1.0},
    "rad": {"rad": 1.0, "deg": math.pi / 180.0, "pi": math.pi},
}

# Symbols that never take an SI prefix
_UNPREFIXED = {"", "%", "deg", "pi"}

_QUANTITY = re.compile(
    r"^\s*(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(?P<unit>\S*)\s*$"
)

_DISPLAY_PREFIXES = [
    (1e-21, "z"),
    (1e-18, "a"),
    (1e-15, "f"),
    (1e-12, "p"),
    (1e-9, "n"),
    (1e-6, "u"),
    (1e-3, "m"),
    (1.0, ""),
    (1e3, "k"),
    (1e6, "M"),
    (1e9, "G"),
]


def _factor(suffix: str, dimension: str) -> float:
    symbols = _UNITS[dimension]
    if suffix in symbols:
        return symbols[suffix]
    for base, factor in symbols.items():
        if base in _UNPREFIXED or not suffix.endswith(base):
            continue
        prefix = suffix[: len(suffix) - len(base)]
        if prefix in _PREFIXES:
            return _PREFIXES[prefix] * factor
    expected = ", ".join(repr(s) for s in symbols if s) or "no unit"
    raise InvalidArgumentError(
        f"unit '{suffix}' does not match dimension '{dimension or '1'}' "
        f"(expected {expected}, optionally SI-prefixed)"
    )


def parse_quantity(value: Any, dimension: str = "") -> float:
    """Convert ``value`` to a float in SI units of ``dimension``.

    Plain numbers are taken as already in SI. Strings carry an optional unit
    suffix, e.g. ``"110 uW"`` for dimension ``"W"`` gives ``1.1e-4``.

    Raises:
        InvalidArgumentError: If the value is not a number or the unit does
            not belong to ``dimension``.
    """
    if dimension not in _UNITS:
        raise InvalidArgumentError(f"unknown dimension '{dimension}'")
    if isinstance(value, bool):
        raise InvalidArgumentError(f"expected a quantity, got boolean {value}")
    if isinstance(value, int | float):
        return float(value)
    if not isinstance(value, str):
        raise InvalidArgumentError(f"expected a quantity, got {type(value).__name__}")
    match = _QUANTITY.match(value)
    if match is None:
        raise InvalidArgumentError(f"cannot parse quantity '{value}'")
    return float(match["number"]) * _factor(match["unit"], dimension)


def quantity(dimension: str) -> Callable[[Any], float]:
    """Build a pydantic ``BeforeValidator`` callable for ``dimension``."""

    def _parse(value: Any) -> float:
        return parse_quantity(value, dimension)

    return _parse


def format_si(value: float, unit: str, digits: int = 3) -> str:
    """Render ``value`` with an engineering prefix, e.g. ``3.31 fm/√Hz``."""
    if value == 0 or not math.isfinite(value):
        return f"{value:g} {unit}"
    magnitude = abs(value)
    scale, prefix = _DISPLAY_PREFIXES[0]
    for candidate, symbol in _DISPLAY_PREFIXES:
        if magnitude >= candidate:
            scale, prefix = candidate, symbol
    return f"{value / scale:.{digits}g} {prefix}{unit}"
