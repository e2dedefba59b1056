import json
import math

import pytest

from pml_contraction.experiments import (
    CSV_SCHEMAS,
    KINDS,
    ExperimentConfig,
    format_value,
    render_csv,
    run_experiment,
)
from pml_contraction.errors import ConfigError, SoundnessAlarm

SMALL = {
    "figure1": {"samples": 200},
    "m0-search": {"samples": 2000},
    "lemma4-check": {"samples": 100},
    "minimax-table": {},
    "theorem3-grid": {},
}


def run(kind, path, seed=0, **params):
    cfg = ExperimentConfig(kind=kind, seed=seed, output_path=str(path),
                           samples=SMALL[kind].get("samples", 1000), parameters=params)
    return run_experiment(cfg)


@pytest.mark.parametrize("kind", KINDS)
def test_runs_and_repeats_byte_for_byte(kind, tmp_path):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    run(kind, a, seed=11)
    run(kind, b, seed=11)
    assert a.read_bytes() == b.read_bytes()


def test_different_seed_changes_figure1(tmp_path):
    run("figure1", tmp_path / "a.csv", seed=1)
    run("figure1", tmp_path / "b.csv", seed=2)
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()


def test_figure1_schema_and_meta(tmp_path):
    out = tmp_path / "k1.csv"
    run("figure1", out, kernel="K1")
    header = out.read_text().splitlines()[0].split(",")
    assert header == list(CSV_SCHEMAS["figure1"])
    meta = json.loads((tmp_path / "k1.csv.meta.json").read_text())
    assert meta["ldp"] == pytest.approx(math.log(15))
    assert "Dirichlet" in meta["sampling"]

    run("figure1", tmp_path / "k2.csv", kernel="K2")
    header = (tmp_path / "k2.csv").read_text().splitlines()[0].split(",")
    assert "kairouz_tv_bound" not in header


def test_figure1_alarm_writes_nothing(tmp_path):
    out = tmp_path / "alarm.csv"
    with pytest.raises(SoundnessAlarm) as info:
        run("figure1", out, kernel="K1", tolerance=-1.0)
    assert not out.exists()
    assert "P" in info.value.witness


def test_m0_search_report(tmp_path):
    rep = run("m0-search", tmp_path / "m0.json", n=5, c=0.1, epsilon=1.0)
    assert rep["found_feasible"] == 0
    assert rep["min_capacity"] >= math.log(4) - 1e-9


def test_m0_search_rejects_vacuous_epsilon(tmp_path):
    with pytest.raises(ConfigError):
        run("m0-search", tmp_path / "m0.json", n=5, c=0.1, epsilon=math.log(4))


def test_lemma4_report(tmp_path):
    rep = run("lemma4-check", tmp_path / "l4.json")
    assert rep["max_tv_violation"] <= 1e-12
    assert all(v <= 1e-12 for v in rep["max_capacity_increase"].values())


def test_theorem3_rows(tmp_path):
    out = tmp_path / "t3.csv"
    summary = run("theorem3-grid", out)
    lines = out.read_text().splitlines()
    assert len(lines) == summary["rows"] + 1
    assert summary["ok"] > 0


def test_minimax_table_rejects_wide_separation(tmp_path):
    with pytest.raises(ConfigError):
        run("minimax-table", tmp_path / "mm.csv", deltas=[0.3])


def test_minimax_table_marks_zero_epsilon(tmp_path):
    out = tmp_path / "mm.csv"
    run("minimax-table", out, eps_values=[0.0], c_values=[0.1], deltas=[0.1])
    assert out.read_text().splitlines()[1].endswith("no_information")


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="figure1", seed=-4)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "figure1", "colour": "red"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(bad)


def test_csv_formatting():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "true" and format_value(None) == ""
    assert render_csv(["a", "b"], [{"a": 1, "b": math.inf}]) == "a,b\n1,inf\n"
