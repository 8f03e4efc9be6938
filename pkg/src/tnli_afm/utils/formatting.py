"""Conversion of results to JSON-ready structures."""

from __future__ import annotations

import dataclasses
import enum
import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy, pydantic and dataclass values to plain JSON types.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``
    so the output stays strict JSON.
    """
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(mode="python"))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if f.repr
        }
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Path):
        return obj.as_posix()
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [to_jsonable(v) for v in obj]
    return obj


def summarize_trace(trace: Any, f_drive: float | None = None) -> dict[str, Any]:
    """Small summary of a spectrum trace: span, bins and floor, without the arrays."""
    from tnli_afm.spectrum import floor_db

    freqs = trace.freq_bins
    return {
        "start_hz": float(freqs[0]),
        "stop_hz": float(freqs[-1]),
        "bins": int(freqs.size),
        "floor_db_rel_snl": floor_db(trace, f_drive),
        "seed": trace.seed,
    }
