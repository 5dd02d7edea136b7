"""Command-line flows: config parsing, exit codes, output determinism."""

import json
import subprocess
import sys

import pytest

from nonauto import sensitivity
from nonauto.cli import main, parse_config, ConfigError
from nonauto.systems import cyclic_sequence, piecewise_linear, sequence_to_dict

F1_KNOTS = [[0.0, 0.0], [0.25, 1.0], [1.0, 0.25]]


def write_config(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def composition_config(tmp_path, **overrides):
    payload = {
        "system": "example41_composition",
        "modes": ["F-sensitive"],
        "family": {"kind": "infinite", "min_count": 10,
                   "tail_fraction": 0.25},
        "delta": 0.2,
        "horizon": 200,
    }
    payload.update(overrides)
    return write_config(tmp_path / "config.json", payload)


class TestRunCommand:
    def test_composition_run_writes_reports(self, tmp_path, capsys):
        cfg = composition_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["schema"] == 1
        assert report["system"] == "example41_composition"
        assert report["reports"][0]["verdict"] == "holds-at-horizon"
        assert len(list(out.glob("hits_*.csv"))) == 16
        assert (out / "plotdata.tsv").exists()
        assert "holds-at-horizon" in capsys.readouterr().out

    def test_identity_fails_at_horizon(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["sensitive"], "delta": 0.1,
            "horizon": 50,
        })
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["reports"][0]["verdict"] == "fails-at-horizon"
        # no hits: header line only
        csv = (out / "hits_ball-00.csv").read_text().splitlines()
        assert csv == ["n,max_separation,witness"]

    def test_inline_system_with_custom_cover(self, tmp_path):
        seq = cyclic_sequence([piecewise_linear(F1_KNOTS)])
        cfg = write_config(tmp_path / "c.json", {
            "system": sequence_to_dict(seq),
            "label": "lone-tent",
            "modes": ["sensitive"],
            "delta": 0.2,
            "horizon": 60,
            "resolution": 16,
            "cover": [
                {"kind": "ball", "center": 0.1, "radius": 0.05,
                 "label": "low"},
                {"kind": "ball", "center": 0.6, "radius": 0.05,
                 "label": "mid"},
            ],
        })
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["system"] == "lone-tent"
        labels = [r["region"] for r in report["reports"][0]["regions"]]
        assert labels == ["low", "mid"]

    def test_plotdata_has_region_columns(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["sensitive"], "delta": 0.1,
            "horizon": 10,
        })
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        lines = (out / "plotdata.tsv").read_text().splitlines()
        header = lines[0].split("\t")
        assert header[0] == "n"
        assert len(header) == 17
        assert len(lines) == 12  # header + times 0..10


class TestExitCodes:
    def test_malformed_json_is_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", str(bad)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_system(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", {
            "system": "volcano", "modes": ["sensitive"], "delta": 0.1,
        })
        assert main(["run", cfg]) == 3
        assert "volcano" in capsys.readouterr().err

    def test_missing_modes(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "delta": 0.1,
        })
        assert main(["run", cfg]) == 2

    def test_family_mode_without_family(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["F-sensitive"], "delta": 0.1,
        })
        assert main(["run", cfg]) == 2

    def test_nonpositive_delta(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["sensitive"], "delta": -1.0,
        })
        assert main(["run", cfg]) == 2

    def test_unknown_check_name(self, capsys):
        assert main(["verify", "--only", "no-such-check"]) == 2
        assert "unknown check" in capsys.readouterr().err


class TestDeterminism:
    def test_reruns_are_byte_identical_across_processes(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["sensitive"], "delta": 0.1,
            "horizon": 40,
        })
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            subprocess.run(
                [sys.executable, "-m", "nonauto.cli", "run", cfg,
                 "--out", str(out)],
                check=True, capture_output=True)
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_worker_env_does_not_change_outputs(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path / "c.json", {
            "system": "identity", "modes": ["sensitive"], "delta": 0.1,
            "horizon": 40,
        })
        results = {}
        for workers, name in (("1", "serial"), ("4", "parallel")):
            monkeypatch.setenv("NONAUTO_WORKERS", workers)
            sensitivity.region_scan.cache_clear()
            out = tmp_path / name
            assert main(["run", cfg, "--out", str(out)]) == 0
            results[name] = {p.name: p.read_bytes() for p in out.iterdir()}
        assert results["serial"] == results["parallel"]


class TestVerifyAndList:
    def test_single_check_passes(self, capsys):
        assert main(["verify", "--only", "two-map-family"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        assert "1 of 1 checks passed" in out

    def test_exit_one_when_any_check_fails(self, monkeypatch, capsys):
        from nonauto import acceptance
        fake = (acceptance.CriterionResult("a", "t", True, "fine"),
                acceptance.CriterionResult("b", "t", False, "broken"))
        monkeypatch.setattr(acceptance, "run_all", lambda only=None: fake)
        assert main(["verify"]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "broken" in out

    def test_list_names_all_systems(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        for name in ("example31", "example41_composition",
                     "rotations_harmonic", "identity"):
            assert name in out


class TestConfigParsing:
    def test_registry_defaults_fill_in(self):
        cfg = parse_config({"system": "example41_composition",
                            "modes": ["sensitive"]})
        assert cfg.deltas == (0.2,)
        assert cfg.horizon == 200
        assert cfg.resolution == 64
        assert len(cfg.cover) == 16

    def test_cover_kind_by_name(self):
        cfg = parse_config({"system": "example31", "modes": ["sensitive"],
                            "cover": "cylinders"})
        assert len(cfg.cover) == 32

    def test_inline_needs_horizon(self):
        seq = cyclic_sequence([piecewise_linear(F1_KNOTS)])
        with pytest.raises(ConfigError):
            parse_config({"system": sequence_to_dict(seq),
                          "modes": ["sensitive"], "delta": 0.1})

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"system": "identity", "modes": ["psychic"],
                          "delta": 0.1})

    def test_unknown_region_kind_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({"system": "identity", "modes": ["sensitive"],
                          "delta": 0.1,
                          "cover": [{"kind": "simplex", "center": 0.5}]})
