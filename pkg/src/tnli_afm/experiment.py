"""Loading, overriding and snapshotting experiment descriptions."""

from __future__ import annotations

import json
import logging
import tomllib
from collections.abc import Iterable, Mapping
from importlib import resources
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from tnli_afm.errors import ConfigError, ConfigIOError
from tnli_afm.models import Experiment
from tnli_afm.utils.resolution import resolve_parameter

logger = logging.getLogger(__name__)

BUNDLED_EXPERIMENT = "paper_default"
DEFAULT_EXPERIMENT = f"{BUNDLED_EXPERIMENT}.toml"

SECTIONS = ("optics", "cantilever", "analyzer", "acquisition")

# Fields that can be set but not swept
_NON_NUMERIC = {"optics.topology", "acquisition.seed"}

# Settable through the gain validator rather than a stored field
_DERIVED = {"optics.r"}


def _section_model(section: str) -> type[BaseModel]:
    return Experiment.model_fields[section].annotation  # type: ignore[return-value]


def settable_paths() -> list[str]:
    """Every dotted path accepted by ``--set``."""
    paths = [
        f"{section}.{name}"
        for section in SECTIONS
        for name in _section_model(section).model_fields
    ]
    return sorted([*paths, *_DERIVED])


def sweepable_paths() -> list[str]:
    """Numeric parameters a sweep can step through."""
    return [p for p in settable_paths() if p not in _NON_NUMERIC]


def _error_path(error: Mapping[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_experiment(data: Mapping[str, Any], source: str = "<memory>") -> Experiment:
    """Validate a raw mapping into an :class:`Experiment`.

    Raises:
        ConfigError: On any schema violation, naming the first offending field.
    """
    try:
        return Experiment.model_validate(dict(data))
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _error_path(first)
        raise ConfigError(
            f"{source}: {path}: {first['msg']}"
            + (f" ({exc.error_count()} errors)" if exc.error_count() > 1 else ""),
            field_path=path,
        ) from exc


def _read_mapping(path: Path) -> dict[str, Any]:
    try:
        raw = path.read_bytes()
    except FileNotFoundError as exc:
        raise ConfigIOError(f"experiment file not found: {path}") from exc
    except OSError as exc:
        raise ConfigIOError(f"cannot read experiment file {path}: {exc}") from exc

    if path.suffix.lower() == ".json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        # A run manifest carries its experiment under "config".
        if isinstance(data, dict) and "config" in data and "tool_version" in data:
            data = data["config"]
    else:
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table")
    return data


def load_experiment(path: str | Path | None = None) -> Experiment:
    """Load an experiment file, or the bundled default when ``path`` is None.

    TOML files and run manifests (``manifest.json``) are accepted, as is the
    name of the bundled experiment (``paper_default``) when no such file exists.

    Raises:
        ConfigIOError: If the file is missing or unreadable.
        ConfigError: If the content violates the schema.
    """
    if path is None:
        return paper_default()
    path = Path(path)
    if str(path) == BUNDLED_EXPERIMENT and not path.exists():
        return paper_default()
    experiment = parse_experiment(_read_mapping(path), source=str(path))
    logger.info(
        "Loaded experiment %s (schema version %d)", path, experiment.schema_version
    )
    return experiment


def paper_default() -> Experiment:
    """The bundled default experiment."""
    text = resources.files("tnli_afm.data").joinpath(DEFAULT_EXPERIMENT).read_text(
        encoding="utf-8"
    )
    return parse_experiment(tomllib.loads(text), source=DEFAULT_EXPERIMENT)


def snapshot(experiment: Experiment) -> dict[str, Any]:
    """SI-valued mapping that :func:`parse_experiment` turns back into ``experiment``."""
    return experiment.model_dump(mode="json")


def get_value(experiment: Experiment, path: str) -> Any:
    """Current value at a dotted path, e.g. ``"optics.eta"``."""
    section, key = resolve_parameter(path, settable_paths()).split(".", 1)
    return getattr(getattr(experiment, section), key)


def with_value(experiment: Experiment, path: str, value: Any) -> Experiment:
    """Return a copy with one parameter replaced, validated like file input.

    ``path`` may be a dotted path or an unambiguous bare field name.

    Raises:
        ConfigError: If the parameter is unknown or the value invalid.
    """
    return with_values(experiment, {path: value})


def with_values(experiment: Experiment, updates: Mapping[str, Any]) -> Experiment:
    """Apply several parameter updates at once (see :func:`with_value`)."""
    data = snapshot(experiment)
    for name, value in updates.items():
        section, key = resolve_parameter(name, settable_paths()).split(".", 1)
        fields = data[section]
        if section == "optics" and key in ("r", "gain"):
            fields.pop("gain", None)
            fields.pop("r", None)
        fields[key] = value
        logger.debug("override %s.%s = %r", section, key, value)
    return parse_experiment(data, source="overrides")


def parse_assignments(assignments: Iterable[str]) -> dict[str, str]:
    """Split ``section.key=value`` strings.

    Raises:
        ConfigError: If an assignment has no ``=``.
    """
    parsed: dict[str, str] = {}
    for assignment in assignments:
        name, sep, value = assignment.partition("=")
        if not sep or not name.strip():
            raise ConfigError(
                f"override '{assignment}' is not of the form section.key=value",
                field_path=name.strip() or None,
            )
        parsed[name.strip()] = value.strip()
    return parsed


def apply_overrides(
    experiment: Experiment,
    assignments: Iterable[str] = (),
    *,
    topology: str | None = None,
    seed: int | None = None,
) -> Experiment:
    """Apply ``--set`` assignments plus the ``--topology`` and ``--seed`` shortcuts."""
    updates: dict[str, Any] = dict(parse_assignments(assignments))
    if topology is not None:
        updates["optics.topology"] = topology
    if seed is not None:
        updates["acquisition.seed"] = seed
    if not updates:
        return experiment
    return with_values(experiment, updates)
