"""Shared test fixtures for tnli-afm."""

import tomllib
from pathlib import Path

import pytest

from tnli_afm.experiment import paper_default, with_values
from tnli_afm.models import Experiment, TnliConfig

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def fixture_path(kind: str, name: str) -> Path:
    """Path of a fixture file, e.g. ``fixture_path("configs", "ideal")``."""
    return FIXTURES_DIR / kind / f"{name}.toml"


def load_fixture(kind: str, name: str) -> dict:
    """Load a TOML fixture file as a raw mapping."""
    with open(fixture_path(kind, name), "rb") as f:
        return tomllib.load(f)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Keep the developer's environment out of the tests."""
    for name in ("TNLI_LOG_LEVEL", "TNLI_SEED", "TNLI_JOBS", "TNLI_CONFIG", "TNLI_READ_ONLY"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1555459200")


@pytest.fixture
def bench() -> Experiment:
    """The bundled default experiment."""
    return paper_default()


@pytest.fixture
def ideal_config() -> TnliConfig:
    """G = 1.5 at unit efficiency, the 3 dB point."""
    return TnliConfig(gain=1.5, eta=1.0)


@pytest.fixture
def fast_experiment(bench) -> Experiment:
    """Default experiment with fewer analyzer averages for Monte Carlo tests."""
    return with_values(bench, {"analyzer.averages": 4})
