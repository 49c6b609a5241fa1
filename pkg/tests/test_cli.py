"""CLI behaviour: validation, figures, golden replay, reproducible output."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from wbansim.cli import (
    EXIT_GOLDEN,
    EXIT_OK,
    EXIT_VALIDATION,
    cmd_golden,
    main,
)
from wbansim.config import (
    ConfigError,
    config_from_dict,
    default_config,
    load_config,
    save_config,
)
from wbansim.scenarios import three_wban_example


def write_quick_config(path: Path, **run_overrides) -> Path:
    cfg = default_config()
    cfg = replace(
        cfg,
        scenario=replace(cfg.scenario, n_wbans=2),
        run=replace(cfg.run, horizon_superframes=10, seeds=[1], **run_overrides),
    )
    save_config(cfg, path)
    return path


class TestConfigValidation:
    def test_default_config_valid(self):
        default_config().validate()

    def test_cli_validate_default_ok(self):
        assert main(["validate"]) == EXIT_OK

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            config_from_dict({"scenario": {"n_wbans": 2, "bogus_field": 1}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            config_from_dict({"wings": {}})

    def test_cross_field_violation_named(self):
        data = {"scenario": {"k_sensors": 15}, "timing": {"ts": 0.005, "bi": 0.1}}
        with pytest.raises(ConfigError, match="active period"):
            config_from_dict(data)

    def test_type_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="expected"):
            config_from_dict({"scenario": {"n_wbans": "three"}})

    def test_cli_validate_bad_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"timing": {"ts": -1}}')
        assert main(["validate", "--config", str(bad)]) == EXIT_VALIDATION

    def test_parse_error_has_location(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="broken.json:1"):
            load_config(bad)

    def test_round_trip_through_file(self, tmp_path):
        path = write_quick_config(tmp_path / "cfg.json")
        loaded = load_config(path)
        assert loaded.scenario.n_wbans == 2
        assert loaded.run.horizon_superframes == 10
        assert loaded.config_hash() == loaded.config_hash()


class TestGolden:
    def test_shipped_fixture_passes(self, tmp_path):
        assert cmd_golden(tmp_path, default_config()) == EXIT_OK
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["golden"]["pass"] is True

    def test_perturbed_fixture_fails_with_named_set(self, tmp_path, capsys):
        network = three_wban_example()
        # drag the cross-network sensor out of range; I_2 must diverge
        sensor = network.sensor_by_key((3, 1))
        sensor.position = sensor.position + np.array([0.0, 2.0, 0.0])
        code = cmd_golden(tmp_path, default_config(), network=network)
        assert code == EXIT_GOLDEN
        out = capsys.readouterr().out
        assert "I_2" in out and "MISMATCH" in out

    def test_cli_golden_exit_zero(self, tmp_path):
        assert main(["golden", "--out", str(tmp_path)]) == EXIT_OK


class TestFigures:
    def test_unknown_figure_name(self, tmp_path):
        code = main(["figure", "nonsense", "--out", str(tmp_path)])
        assert code == EXIT_VALIDATION

    def test_beacon_prob_outputs(self, tmp_path):
        cfg_path = write_quick_config(tmp_path / "cfg.json")
        code = main(
            [
                "figure",
                "beacon_prob",
                "--config",
                str(cfg_path),
                "--out",
                str(tmp_path / "out"),
                "--seeds",
                "1",
            ]
        )
        assert code == EXIT_OK
        csv_path = tmp_path / "out" / "beacon_prob.csv"
        svg_path = tmp_path / "out" / "beacon_prob.svg"
        assert csv_path.exists() and svg_path.exists()
        text = csv_path.read_text()
        assert text.startswith("# schema_version=1\n# config_hash=")
        header = text.splitlines()[3]
        assert header.startswith("schema_version,n_wbans,pr_bsucc_simulated")
        assert "<svg" in svg_path.read_text()

    def test_fdr_figure_runs(self, tmp_path):
        cfg = default_config()
        cfg = replace(
            cfg,
            scenario=replace(cfg.scenario, n_wbans=2),
            run=replace(
                cfg.run,
                horizon_superframes=6,
                seeds=[1],
                sweep_values=[2.0, 3.0],
            ),
        )
        cfg_path = tmp_path / "cfg.json"
        save_config(cfg, cfg_path)
        code = main(
            ["figure", "fdr", "--config", str(cfg_path), "--out", str(tmp_path / "o")]
        )
        assert code == EXIT_OK
        rows = (tmp_path / "o" / "fdr.csv").read_text().splitlines()
        assert len(rows) == 4 + 6  # 3 comments + header + 2 values x 3 protocols

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = write_quick_config(tmp_path / "cfg.json")
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert (
                main(
                    [
                        "figure",
                        "beacon_prob",
                        "--config",
                        str(cfg_path),
                        "--out",
                        str(out),
                        "--seeds",
                        "3",
                    ]
                )
                == EXIT_OK
            )
            outputs.append((out / "beacon_prob.csv").read_bytes())
        assert outputs[0] == outputs[1]


class TestSweepAndAnalytics:
    def test_sweep_command(self, tmp_path):
        cfg = default_config()
        cfg = replace(
            cfg,
            scenario=replace(cfg.scenario, n_wbans=2),
            run=replace(
                cfg.run,
                horizon_superframes=5,
                seeds=[1],
                sweep_axis="theta",
                sweep_values=[10.0, 20.0],
            ),
        )
        cfg_path = tmp_path / "cfg.json"
        save_config(cfg, cfg_path)
        code = main(
            [
                "sweep",
                "--config",
                str(cfg_path),
                "--out",
                str(tmp_path / "s"),
                "--protocols",
                "os",
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "s" / "sweep.csv").exists()
        manifest = json.loads((tmp_path / "s" / "manifest.json").read_text())
        assert manifest["command"] == "sweep theta"
        assert manifest["config_hash"] == cfg.config_hash()

    def test_analytics_command(self, tmp_path):
        code = main(["analytics", "--out", str(tmp_path / "a")])
        assert code == EXIT_OK
        text = (tmp_path / "a" / "analytics.csv").read_text()
        assert "pr_bsucc_fixedpoint" in text

    def test_init_config(self, tmp_path):
        assert main(["init-config", "--out", str(tmp_path)]) == EXIT_OK
        cfg = load_config(tmp_path / "config.json")
        cfg.validate()
