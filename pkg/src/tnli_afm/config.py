"""Process settings for tnli-afm, read from the environment."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20190417


@dataclass(frozen=True)
class Settings:
    """Settings shared by the CLI and the tool server."""

    log_level: str
    seed: int
    jobs: int
    config_path: Path | None
    read_only: bool

    @classmethod
    def from_env(cls) -> Settings:
        """Load settings from environment variables.

        Environment variables:
            TNLI_LOG_LEVEL: Logging level (default: INFO)
            TNLI_SEED: Default seed for stochastic commands (default: 20190417)
            TNLI_JOBS: Default parallelism bound for sweeps (default: 1)
            TNLI_CONFIG: Experiment file for the tool server (default: bundled paper_default)
            TNLI_READ_ONLY: Set to '1', 'true', or 'yes' to disable file-writing tools
        """
        read_only = os.environ.get("TNLI_READ_ONLY", "").lower() in (
            "1",
            "true",
            "yes",
        )
        log_level = os.environ.get("TNLI_LOG_LEVEL", "INFO").upper()
        config_path = os.environ.get("TNLI_CONFIG", "").strip()

        return cls(
            log_level=log_level,
            seed=_int_from_env("TNLI_SEED", DEFAULT_SEED),
            jobs=max(1, _int_from_env("TNLI_JOBS", 1)),
            config_path=Path(config_path) if config_path else None,
            read_only=read_only,
        )


def _int_from_env(name: str, default: int) -> int:
    """Parse an integer variable, falling back to ``default`` if unset or malformed."""
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw, 0)
    except ValueError:
        logger.warning("%s=%r is not an integer; using %d", name, raw, default)
        return default
