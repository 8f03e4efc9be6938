"""CSV and JSON writers for traces, tables and run manifests.

CSV files start with a block of ``# key=value`` lines carrying the settings
and seed behind the data, followed by a single header row.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from tnli_afm import __version__
from tnli_afm.errors import ConfigIOError
from tnli_afm.experiment import snapshot
from tnli_afm.models import Experiment
from tnli_afm.spectrum import SpectrumTrace
from tnli_afm.utils.formatting import to_jsonable

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("freq_hz", "power_db_rel_snl")
MANIFEST_NAME = "manifest.json"


def source_timestamp() -> str:
    """UTC timestamp, pinned by ``SOURCE_DATE_EPOCH`` when it is set."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    moment = (
        datetime.fromtimestamp(int(epoch), tz=UTC) if epoch else datetime.now(tz=UTC)
    )
    return moment.isoformat(timespec="seconds").replace("+00:00", "Z")


def ensure_output_dir(path: str | Path) -> Path:
    """Create ``path`` if needed and check that it is a writable directory.

    Raises:
        ConfigIOError: If the directory cannot be created or written.
    """
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigIOError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise ConfigIOError(f"output directory {path} is not writable")
    return path


def _write_text(path: Path, text: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise ConfigIOError(f"cannot write {path}: {exc}") from exc
    logger.debug("wrote %s", path)
    return path


def _header_block(metadata: Mapping[str, Any]) -> str:
    return "".join(f"# {key}={value}\n" for key, value in metadata.items())


def render_table_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> str:
    """Render rows as CSV text with an optional ``# key=value`` header block."""
    buffer = io.StringIO()
    buffer.write(_header_block(metadata or {}))
    writer = csv.writer(buffer)
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def trace_metadata(trace: SpectrumTrace, **extra: Any) -> dict[str, Any]:
    """Settings and seed recorded alongside a trace."""
    settings = trace.settings
    return {
        "tool_version": __version__,
        "seed": trace.seed,
        "rbw_hz": settings.rbw,
        "vbw_hz": settings.vbw,
        "sweep_time_s": settings.sweep_time,
        "averages": settings.averages,
        "center_hz": settings.center,
        "span_hz": settings.span,
        "sample_rate_hz": trace.sample_rate,
        **extra,
    }


def write_trace_csv(
    path: str | Path, trace: SpectrumTrace, metadata: Mapping[str, Any] | None = None
) -> Path:
    rows = zip(trace.freq_bins.tolist(), trace.power.tolist(), strict=True)
    text = render_table_csv(
        TRACE_COLUMNS, rows, metadata or trace_metadata(trace)
    )
    return _write_text(Path(path), text)


def trace_to_dict(
    trace: SpectrumTrace, metadata: Mapping[str, Any] | None = None
) -> dict[str, Any]:
    """JSON mirror of :func:`write_trace_csv`."""
    return {
        "metadata": to_jsonable(metadata or trace_metadata(trace)),
        "freq_hz": trace.freq_bins.tolist(),
        "power_db_rel_snl": trace.power.tolist(),
    }


def write_json(path: str | Path, obj: Any) -> Path:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
    return _write_text(Path(path), text)


def write_trace(
    out_dir: Path, stem: str, trace: SpectrumTrace, metadata: Mapping[str, Any]
) -> list[Path]:
    """Write ``<stem>.csv`` and its ``<stem>.json`` mirror into ``out_dir``."""
    return [
        write_trace_csv(out_dir / f"{stem}.csv", trace, metadata),
        write_json(out_dir / f"{stem}.json", trace_to_dict(trace, metadata)),
    ]


def write_table_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    return _write_text(Path(path), render_table_csv(columns, rows, metadata))


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to rerun a command and get the same files back."""

    command: str
    config: dict[str, Any]
    seed: int | None
    outputs: list[str]
    tool_version: str = __version__
    timestamp: str = field(default_factory=source_timestamp)
    parameters: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def for_run(
        cls,
        command: str,
        experiment: Experiment,
        seed: int | None,
        outputs: Iterable[Path],
        out_dir: Path,
        **parameters: Any,
    ) -> RunManifest:
        return cls(
            command=command,
            config=snapshot(experiment),
            seed=seed,
            outputs=sorted(p.relative_to(out_dir).as_posix() for p in outputs),
            parameters=parameters,
        )


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    """Write ``manifest.json``; it lists every other file of the run."""
    return write_json(out_dir / MANIFEST_NAME, manifest)
