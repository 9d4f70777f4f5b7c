from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from cqedprobe.cli import (CSV_COLUMNS, EXIT_CERTIFY, EXIT_CONFIG, EXIT_RESOURCE, ConfigError,
                           RunConfig, load_config, load_json_series, main, parse_assignments,
                           validate)

DEFAULT_CFG = Path(__file__).resolve().parents[1] / "configs" / "default.cfg"


def _rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.reader(lines))


def test_default_config_matches_run_config_defaults():
    cfg = load_config(DEFAULT_CFG)
    assert (cfg.n_sites, cfg.hx_over_2j, cfg.temperature_mk) == (20, 1.0, 20.0)
    assert validate(cfg) == []


def test_parse_assignments():
    vals = parse_assignments(["# comment", "n_sites = 8  # inline", "", "boundary=open"])
    assert vals == {"n_sites": 8, "boundary": "open"}
    with pytest.raises(ConfigError):
        parse_assignments(["no_equals_sign"])
    with pytest.raises(ConfigError):
        parse_assignments(["unknown_key = 1"])
    with pytest.raises(ConfigError):
        parse_assignments(["n_sites = 2.5"])


def test_validate_errors_and_warnings():
    assert any(d.level == "error" for d in validate(RunConfig(epsilon_khz=0.0)))
    assert any(d.level == "error" for d in validate(RunConfig(mode="sweep", sweep_steps=1)))
    assert any(d.level == "error" for d in validate(RunConfig(mode="sweep", sweep_param="n_sites")))
    big = validate(RunConfig(n_sites=400, hx_over_2j=0.5))
    assert any(d.code == "backaction" and "300" in d.message for d in big)
    assert any(d.code == "weak-probe" for d in validate(RunConfig(lambda_mhz=200.0)))
    coarse = validate(RunConfig(grid="uniform", grid_points=101))
    assert any(d.code == "grid" for d in coarse)


def test_validate_does_not_mutate():
    cfg = RunConfig(n_sites=400)
    before = cfg.physics()
    validate(cfg)
    assert cfg.physics() == before


def test_spectrum_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--config", str(DEFAULT_CFG), "--set", "n_sites=8",
                 "--output", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# tool: cqedprobe")
    assert "# config_hash: " in text
    rows = _rows(out)
    assert tuple(rows[0]) == CSV_COLUMNS
    data = np.array(rows[1:], dtype=float)
    assert np.all(np.diff(data[:, 0]) > 0)
    assert np.allclose(data[:, 1], data[:, 2:5].sum(axis=1), rtol=1e-12)
    assert np.allclose(data[:, 5], np.log10(np.maximum(data[:, 1], 1e-30)))


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["spectrum", "--set", "n_sites=6", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_round_trip(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["spectrum", "--set", "n_sites=6", "--set", "boundary=open",
                 "--format", "json", "--output", str(first)]) == 0
    doc = json.loads(first.read_text())
    assert set(doc) == {"meta", "grid", "series", "peaks"}
    assert set(doc["series"]) == {"total", "bath", "zero", "finite"}
    assert main(["spectrum", "--config", str(first), "--format", "json",
                 "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    meta, series = load_json_series(first)
    assert meta["config"]["boundary"] == "open"
    assert np.allclose(series.total, doc["series"]["total"])


def test_sweep_order_independent_of_workers(tmp_path):
    one, many = tmp_path / "one.csv", tmp_path / "many.csv"
    common = ["--set", "n_sites=6", "--set", "sweep_steps=4", "--set", "sweep_stop=1.0"]
    assert main(["sweep", *common, "--workers", "1", "--output", str(one)]) == 0
    assert main(["sweep", *common, "--workers", "3", "--output", str(many)]) == 0
    assert one.read_bytes() == many.read_bytes()
    assert "# peaks summary" in one.read_text()


def test_sweep_json_summary(tmp_path):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--set", "n_sites=20", "--set", "sweep_start=0.9",
                 "--set", "sweep_stop=1.1", "--set", "sweep_steps=3",
                 "--format", "json", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    summary = doc["summary"]
    assert [s["n_positive_peaks"] for s in summary] == [9, 9, 9]
    assert summary[1]["min_positive_peak"] == pytest.approx(8 * np.sin(np.pi / 20), abs=1e-4)


def test_backaction_and_equal_time(tmp_path):
    out = tmp_path / "b.json"
    assert main(["backaction", "--set", "n_sites=400", "--set", "hx_over_2j=0.5",
                 "--format", "json", "--output", str(out)]) == 0
    record = json.loads(out.read_text())["results"][0]
    assert record["perturbative_validity"] is False
    et = tmp_path / "e.csv"
    assert main(["equal-time", "--set", "n_sites=6", "--set", "pair=2,2",
                 "--output", str(et)]) == 0
    assert float(_rows(et)[1][0]) == pytest.approx(1 + 16 * 0.04**2 / 144)


def test_certify_exit_codes(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["certify", "--set", "cert_sizes=4", "--output", str(out)]) == 0
    assert "pass" in capsys.readouterr().err
    assert main(["certify", "--set", "cert_sizes=3", "--set", "cert_tol=1e-20",
                 "--output", str(out)]) == EXIT_CERTIFY
    assert main(["certify", "--set", "cert_sizes=12"]) == EXIT_RESOURCE


def test_invalid_config_exit_code(capsys):
    assert main(["spectrum", "--set", "epsilon_khz=-1"]) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "invalid_config"
    assert main(["spectrum", "--set", "bogus=1"]) == EXIT_CONFIG
    assert main(["spectrum", "--set", "n_sites=5000"]) == EXIT_RESOURCE
