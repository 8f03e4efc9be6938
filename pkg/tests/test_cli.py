"""Tests for the command-line front end."""

import csv
import io
import json
import math

import pytest

from tnli_afm import __version__
from tnli_afm.cli import build_parser, main
from tnli_afm.errors import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION
from tests.conftest import fixture_path


def _csv_rows(text: str) -> list[dict[str, str]]:
    body = "".join(line for line in io.StringIO(text) if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


class TestBudget:
    def test_default_table(self, capsys):
        assert main(["budget"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "3.31 fm/√Hz" in out
        assert "247 zm/√Hz" in out
        for topology in ("probe", "lo", "dual"):
            assert topology in out
        assert "P_tot = 183 uW" in out

    def test_single_topology(self, capsys):
        assert main(["budget", "--topology", "probe"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "28.9 zm/√Hz" in out
        assert "247 zm/√Hz" not in out

    def test_json_file(self, tmp_path):
        path = tmp_path / "budget.json"
        assert main(["budget", "--json", str(path)]) == EXIT_OK
        budgets = json.loads(path.read_text())
        assert [b["topology"] for b in budgets] == ["probe", "lo", "dual"]
        assert budgets[1]["snl_asd"] == pytest.approx(3.306e-15, rel=1e-3)

    def test_json_stdout_echoes_config(self, capsys):
        assert main(["budget", "--topology", "lo", "--json", "-"]) == EXIT_OK
        out = capsys.readouterr().out
        (budget,) = json.loads(out[out.index("[\n"):])
        assert budget["sql_psd"] == pytest.approx(budget["sql_asd"] ** 2)
        assert budget["snl_db_rel_snl"] == 0.0
        assert budget["backaction_db_rel_snl"] == pytest.approx(
            20 * math.log10(budget["backaction_asd"] / budget["snl_asd"])
        )
        assert budget["config"]["p_lo_probe"] == pytest.approx(110e-6)
        assert budget["config"]["topology"] == "lo"
        assert budget["cantilever"]["k"] == 0.2

    def test_bundled_config_by_name(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["budget", "--config", "paper_default"]) == EXIT_OK
        assert "3.31 fm/√Hz" in capsys.readouterr().out

    def test_lo_scale(self, capsys):
        assert main(["budget", "--topology", "lo", "--lo-scale", "100"]) == EXIT_OK
        assert "2.47 am/√Hz" in capsys.readouterr().out


class TestVariance:
    def test_ideal_fixture(self, capsys):
        config = str(fixture_path("configs", "ideal"))
        assert main(["variance", "--config", config]) == EXIT_OK
        out = capsys.readouterr().out
        assert "3.0103 dB" in out

    def test_target_gain(self, capsys):
        assert main(["variance", "--target-db", "2.9"]) == EXIT_OK
        assert "gain for 2.9 dB   1.88" in capsys.readouterr().out

    def test_json_stdout(self, capsys):
        assert main(["variance", "--set", "optics.gain=1.5", "--set", "eta=1", "--json", "-"]) == 0
        out = capsys.readouterr().out
        report = json.loads(out[out.index("{"):])
        assert report["engine_variance"] == pytest.approx(0.5)


class TestSweep:
    def test_stdout_csv(self, capsys):
        args = ["sweep", "--param", "gain", "--from", "1", "--to", "2", "--steps", "3"]
        assert main(args) == EXIT_OK
        out = capsys.readouterr().out
        assert "# parameter=optics.gain" in out
        rows = _csv_rows(out)
        assert [float(row["value"]) for row in rows] == [1.0, 1.5, 2.0]

    def test_out_file(self, tmp_path):
        path = tmp_path / "sweep.csv"
        args = [
            "sweep", "--param", "drive_amplitude", "--from", "40 mV", "--to", "180 mV",
            "--steps", "2", "--out", str(path),
        ]
        assert main(args) == EXIT_OK
        rows = _csv_rows(path.read_text())
        assert float(rows[1]["value"]) == pytest.approx(0.18)

    def test_single_step_is_validation_error(self):
        args = ["sweep", "--param", "gain", "--from", "1", "--to", "2", "--steps", "1"]
        assert main(args) == EXIT_VALIDATION


class TestSpectrum:
    def test_writes_outputs(self, tmp_path, capsys):
        args = ["spectrum", "--set", "analyzer.averages=2", "--seed", "5", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        assert {p.name for p in tmp_path.iterdir()} == {
            "spectrum.csv",
            "spectrum.json",
            "manifest.json",
        }
        assert "seed              5" in capsys.readouterr().out

    def test_degenerate_optics_is_numerical_error(self, tmp_path):
        args = [
            "spectrum", "--set", "optics.eta=0", "--set", "analyzer.averages=1",
            "--out", str(tmp_path),
        ]
        assert main(args) == EXIT_NUMERICAL


class TestReproduce:
    def test_fig3(self, tmp_path, capsys):
        args = ["reproduce", "fig3", "--set", "analyzer.averages=2", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        out = capsys.readouterr().out
        assert "fig3: lo on cantilever" in out
        assert (tmp_path / "manifest.json").exists()

    def test_unknown_figure_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["reproduce", "fig9", "--out", str(tmp_path)])
        assert exc_info.value.code == 2


class TestExitCodes:
    def test_missing_config(self, tmp_path):
        assert main(["budget", "--config", str(tmp_path / "missing.toml")]) == EXIT_IO

    def test_wrong_unit(self, caplog):
        config = str(fixture_path("configs", "wrong_unit"))
        assert main(["budget", "--config", config]) == EXIT_VALIDATION
        assert "optics.p_lo_probe" in caplog.text

    def test_malformed_override(self):
        assert main(["budget", "--set", "optics.eta"]) == EXIT_VALIDATION

    def test_unknown_topology(self):
        assert main(["budget", "--topology", "mirror"]) == EXIT_VALIDATION

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        args = ["spectrum", "--set", "analyzer.averages=1", "--out", str(blocker / "out")]
        assert main(args) == EXIT_IO

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--version"])
    assert __version__ in capsys.readouterr().out


def test_seed_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("TNLI_SEED", "31")
    args = ["spectrum", "--set", "analyzer.averages=1", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 31
