import json
import math

import numpy as np
import pytest
import yaml

import blockade as bl
from blockade import cli

MINIMAL_SPECTRUM = """
scenario: spectrum
params:
  g: 15.0
  phi_z: 0.0
  eta: 0.5
grid:
  start: -2.0
  stop: 2.0
  points: 401
output_path: spectrum.csv
"""

TINY_SPECTRUM = """
scenario: spectrum
params:
  g: 2.0
  phi_z: 0.0
  eta: 0.3
n_max: 2
grid:
  start: -1.0
  stop: 1.0
  points: 5
output_path: tiny.csv
"""

TINY_PNSTAT = """
scenario: pnstat
params:
  g: 2.0
  phi_z: 0.0
  eta: 0.4
  delta: -1.0
n_max: 3
output_path: pn.csv
"""


def test_parse_minimal_spectrum_fills_defaults():
    cfg = cli.parse_config(MINIMAL_SPECTRUM)
    assert cfg.scenario == "spectrum"
    assert cfg.n_max == 8
    assert cfg.params.gamma == 1.0 and cfg.params.kappa == 1.0
    assert cfg.grid.points == 401
    assert cfg.resolved["params"]["gamma"] == 1.0
    assert cfg.resolved["n_max"] == 8
    assert cfg.check_truncation is False


@pytest.mark.parametrize(
    "mutation,fragment",
    [
        ("gg: 3", "unknown key 'gg'"),
        ("tau:\n  t_max: 1.0\n  dt_out: 0.1", "'tau' is not accepted"),
    ],
)
def test_unknown_and_misplaced_top_level_keys(mutation, fragment):
    with pytest.raises(bl.ConfigError, match=fragment):
        cli.parse_config(MINIMAL_SPECTRUM + mutation + "\n")


def test_unknown_param_key_is_named():
    text = MINIMAL_SPECTRUM.replace("  eta: 0.5", "  eta: 0.5\n  gg: 1.0")
    with pytest.raises(bl.ConfigError, match="unknown key 'gg' in params"):
        cli.parse_config(text)


def test_rejected_param_key_for_scenario():
    text = MINIMAL_SPECTRUM.replace("  eta: 0.5", "  eta: 0.5\n  delta: -1.0")
    with pytest.raises(bl.ConfigError, match="'delta' in params is not accepted"):
        cli.parse_config(text)


def test_grid_points_out_of_range():
    with pytest.raises(bl.ConfigError, match="grid.points"):
        cli.parse_config(MINIMAL_SPECTRUM.replace("points: 401", "points: 1"))


@pytest.mark.parametrize(
    "removal,fragment",
    [
        ("output_path: spectrum.csv", "output_path"),
        ("  eta: 0.5", "params key 'eta'"),
        ("grid:\n  start: -2.0\n  stop: 2.0\n  points: 401", "key 'grid'"),
    ],
)
def test_missing_required_keys(removal, fragment):
    text = MINIMAL_SPECTRUM.replace(removal, "")
    with pytest.raises(bl.ConfigError, match=fragment):
        cli.parse_config(text)


def test_malformed_yaml_rejected():
    with pytest.raises(bl.ConfigError, match="malformed"):
        cli.parse_config("{scenario: [unclosed")


def test_unknown_scenario_rejected():
    with pytest.raises(bl.ConfigError, match="scenario"):
        cli.parse_config(MINIMAL_SPECTRUM.replace("spectrum", "emission"))


def test_delta_conflict_rejected():
    text = TINY_PNSTAT.replace("  delta: -1.0", "  delta: -1.0\n  delta_a: -1.0")
    with pytest.raises(bl.ConfigError, match="conflicts"):
        cli.parse_config(text)


def test_split_detunings_accepted():
    text = TINY_PNSTAT.replace("  delta: -1.0", "  delta_a: -1.0\n  delta_cav: -2.0")
    cfg = cli.parse_config(text)
    assert cfg.params.delta_a == -1.0 and cfg.params.delta_cav == -2.0


def test_missing_detuning_rejected():
    text = TINY_PNSTAT.replace("  delta: -1.0\n", "")
    with pytest.raises(bl.ConfigError, match="requires params.delta"):
        cli.parse_config(text)


def test_g3tau_truncation_guard():
    text = """
scenario: g3tau
params: {g: 2.0, phi_z: 0.0, eta: 0.4, delta: -1.0}
n_max: 2
tau: {t_max: 1.0, dt_out: 0.1}
output_path: out.csv
"""
    with pytest.raises(bl.ConfigError, match="n_max"):
        cli.parse_config(text)


def test_dressed_phase_guard():
    text = """
scenario: dressed
params: {g: 2.0, phi_z: 0.7}
output_path: levels.json
"""
    with pytest.raises(bl.ConfigError, match="phi_z"):
        cli.parse_config(text)


def test_resolved_config_round_trip():
    cfg = cli.parse_config(TINY_PNSTAT)
    again = cli.parse_config(json.dumps(cfg.resolved))
    assert again == cfg


def test_all_presets_parse():
    expected = {
        "fig2b": "spectrum", "fig2c": "rabi_scan", "fig3a": "g2tau",
        "fig3b": "pnstat", "fig4b": "spectrum", "fig4c": "rabi_scan",
        "fig5a": "g3tau", "fig5b": "pnstat",
    }
    for name, scenario in expected.items():
        cfg = cli.parse_config(cli.preset_text(name))
        assert cfg.scenario == scenario
        assert cfg.params.g == 15.0


def test_run_tiny_spectrum_deterministic(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = cli.parse_config(TINY_SPECTRUM)
    assert cli.run_scenario(cfg) == 0
    first = (tmp_path / "tiny.csv").read_bytes()
    meta_first = (tmp_path / "tiny.csv.meta.json").read_bytes()
    assert cli.run_scenario(cfg) == 0
    assert (tmp_path / "tiny.csv").read_bytes() == first
    assert (tmp_path / "tiny.csv.meta.json").read_bytes() == meta_first

    lines = first.decode().splitlines()
    assert lines[0] == "delta_over_g,mean_n"
    assert len(lines) == 6
    meta = json.loads(meta_first)
    assert meta["tool"] == "blockade"
    assert meta["solver"]["residual_max"] <= 1e-10
    assert meta["solver"]["point_errors"] == []
    # closure: re-parsing the embedded config reproduces the run configuration
    assert cli.parse_config(json.dumps(meta["config"])) == cfg


def test_run_spectrum_without_drive_is_zero(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = cli.parse_config(TINY_SPECTRUM.replace("eta: 0.3", "eta: 0.0"))
    assert cli.run_scenario(cfg) == 0
    data = np.loadtxt(tmp_path / "tiny.csv", delimiter=",", skiprows=1)
    assert np.abs(data[:, 1]).max() <= 1e-12


def test_run_pnstat_with_truncation_check(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = cli.parse_config(TINY_PNSTAT).with_check_truncation()
    assert cli.run_scenario(cfg) == 0
    meta = json.loads((tmp_path / "pn.csv.meta.json").read_text())
    trunc = meta["truncation"]
    assert trunc["n_max"] == 3 and trunc["recheck_n_max"] == 5
    assert 0.0 <= trunc["max_rel_change"] < 0.1  # toy point; real convergence is acceptance-tested
    rows = (tmp_path / "pn.csv").read_text().splitlines()
    assert rows[0] == "n,p_n,poisson_p_n,deviation"
    assert len(rows) == 2 + cfg.n_max


def test_run_dressed_levels(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    text = """
scenario: dressed
params: {g: 15.0, phi_z: 0.0}
output_path: levels.json
"""
    assert cli.run_scenario(cli.parse_config(text)) == 0
    records = json.loads((tmp_path / "levels.json").read_text())
    assert len(records) == 11  # 3 + 4 + 4 levels
    by_manifold = {}
    for rec in records:
        by_manifold.setdefault(rec["n"], []).append(rec["energy_over_g"])
    assert max(by_manifold[1]) == pytest.approx(math.sqrt(2), abs=1e-10)
    assert max(by_manifold[2]) == pytest.approx(math.sqrt(6), abs=1e-10)
    assert max(by_manifold[3]) == pytest.approx(math.sqrt(10), abs=1e-10)
    assert len(records[0]["amplitudes"]) == 3
    assert len(records[-1]["amplitudes"]) == 4


def test_main_scenario_flow(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "scan.yaml"
    config.write_text(TINY_SPECTRUM)
    assert cli.main(["spectrum", "--config", str(config), "--out", "renamed.csv"]) == 0
    assert (tmp_path / "renamed.csv").exists()
    meta = json.loads((tmp_path / "renamed.csv.meta.json").read_text())
    assert meta["config"]["output_path"] == "renamed.csv"
    assert meta["truncation"] is None


def test_main_check_truncation_flag(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "pn.yaml"
    config.write_text(TINY_PNSTAT)
    assert cli.main(["pnstat", "--config", str(config), "--check-truncation"]) == 0
    meta = json.loads((tmp_path / "pn.csv.meta.json").read_text())
    assert meta["truncation"]["recheck_n_max"] == 5
    assert meta["config"]["check_truncation"] is True


def test_main_usage_errors(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "scan.yaml"
    config.write_text(TINY_SPECTRUM)
    assert cli.main(["spectrum"]) == 1  # missing --config
    assert cli.main(["warp", "--config", str(config)]) == 1  # unknown target
    assert cli.main(["fig2b", "--config", str(config)]) == 1  # preset with config
    assert cli.main(["rabi_scan", "--config", str(config)]) == 1  # scenario mismatch
    assert cli.main(["spectrum", "--config", str(config), "--threads", "0"]) == 1


def test_main_io_failure(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "scan.yaml"
    config.write_text(TINY_SPECTRUM.replace("tiny.csv", "missing_dir/tiny.csv"))
    assert cli.main(["spectrum", "--config", str(config)]) == 3


def test_main_numerical_failure(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    # degenerate generator: no drive, no decay channels for the atoms
    config = tmp_path / "bad.yaml"
    config.write_text(
        """
scenario: pnstat
params: {g: 0.0, phi_z: 0.0, eta: 0.0, delta: 0.0, gamma: 0.0}
n_max: 1
output_path: bad.csv
"""
    )
    assert cli.main(["pnstat", "--config", str(config)]) == 2


def test_preset_text_unknown():
    with pytest.raises(bl.ConfigError, match="preset"):
        cli.preset_text("fig9z")


def test_fig3a_preset_headline_row(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["fig3a", "--out", "fig3a.csv"]) == 0
    lines = (tmp_path / "fig3a.csv").read_text().splitlines()
    assert lines[0] == "kappa_tau,g2,g3"
    tau0, g2, g3 = (float(v) for v in lines[1].split(","))
    assert tau0 == 0.0
    assert g2 == pytest.approx(1.75, abs=0.15)
    assert g3 == pytest.approx(0.50, abs=0.10)


def test_preset_delta_matches_derived_resonance():
    for name in ("fig3a", "fig3b", "fig5a", "fig5b"):
        doc = yaml.safe_load(cli.preset_text(name))
        assert doc["params"]["delta"] == bl.two_photon_resonance_detuning(15.0)
