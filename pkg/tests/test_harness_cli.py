"""Harness (sweep, aggregation, emission) and the CLI surface."""

import json
import os
import subprocess
import sys

import pytest

from nakasim import emit_csv, emit_json, run_scenario, summary_text, sweep
from nakasim.harness import aggregate, extract, replicate
from nakasim.metrics import report_rows
from nakasim.mining import ValidationError

FAST = {"horizon.blocks": 400}


def small_report(seed=1):
    return run_scenario("gfw-empty-blocks-2015", seed=seed, overrides=FAST)


def test_csv_and_json_encode_identical_values():
    rep = small_report()
    round_trip = json.loads(emit_json(rep))
    assert report_rows(rep) == [
        tuple(r) for r in
        ((a, b, c, d) for a, b, c, d in report_rows(round_trip))]
    assert emit_csv(rep) == emit_csv(round_trip)


def test_csv_is_deterministic_across_runs():
    assert emit_csv(small_report()) == emit_csv(small_report())


def test_summary_mentions_groups_and_attacks():
    text = summary_text(small_report())
    assert "china" in text and "overseas" in text
    race = run_scenario("double-spend-race", seed=1,
                        overrides={"strategies.race.episodes": 20})
    assert "double_spend_race" in summary_text(race)


def test_sweep_rejects_bad_inputs():
    with pytest.raises(ValidationError, match="non-empty"):
        sweep("selfish-sweep", "miners.0.hash_share", [], seeds=[1])
    with pytest.raises(ValidationError, match="not numeric"):
        sweep("selfish-sweep", "miners.0.miner_id", [0.1], seeds=[1])


def test_sweep_single_cell_equals_plain_run():
    rows = sweep("selfish-sweep", "miners.0.hash_share", [0.3],
                 seeds=[7], metric_path="attacks.selfish.main_share")
    plain = run_scenario("selfish-sweep", seed=7)
    assert rows[0]["mean"] == pytest.approx(
        plain["attacks"]["selfish"]["main_share"])


def test_sweep_cells_are_independent():
    seeds = [1, 2]
    both = sweep("selfish-sweep", "miners.0.hash_share", [0.2, 0.3],
                 seeds=seeds, metric_path="attacks.selfish.main_share")
    solo = sweep("selfish-sweep", "miners.0.hash_share", [0.3],
                 seeds=seeds, metric_path="attacks.selfish.main_share")
    assert both[1]["mean"] == pytest.approx(solo[0]["mean"])


def test_replicate_and_aggregate():
    reports = replicate("deanon-clustering", seeds=[1, 2, 3])
    agg = aggregate(reports, "deanon.recall")
    assert agg["n"] == 3
    assert 0.0 < agg["mean"] < 1.0
    assert extract(reports[0], "deanon.precision") == 1.0


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "nakasim.cli", *args],
                          capture_output=True, text=True)


def test_cli_list_scenarios():
    res = run_cli("list-scenarios")
    assert res.returncode == 0
    names = res.stdout.split()
    assert "gfw-empty-blocks-2015" in names
    assert len(names) == 14


def test_cli_validate_ok_and_failure(tmp_path):
    res = run_cli("validate", "balance-attack")
    assert res.returncode == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "name": "bad", "horizon": {"blocks": 5},
        "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                     "edges": []},
        "miners": [{"miner_id": "a", "hash_share": 0.5}]}))
    res = run_cli("validate", str(bad))
    assert res.returncode == 1
    assert "sum to 1" in res.stderr


def test_cli_run_writes_csv_and_json(tmp_path):
    out = tmp_path / "results"
    res = run_cli("run", "deanon-clustering", "--seed", "3",
                  "--out", str(out), "--format", "json")
    assert res.returncode == 0
    assert json.loads(res.stdout)["deanon"]["precision"] == 1.0
    files = sorted(os.listdir(out))
    assert files == ["deanon-clustering-seed3.csv",
                     "deanon-clustering-seed3.json"]
    csv_text = (out / files[0]).read_text()
    assert csv_text.splitlines()[0] == "record,name,metric,value"


def test_cli_run_csv_deterministic(tmp_path):
    a = run_cli("run", "balance-attack", "--seed", "6", "--format", "csv")
    b = run_cli("run", "balance-attack", "--seed", "6", "--format", "csv")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_cli_sweep(tmp_path):
    res = run_cli("sweep", "deanon-clustering", "--param",
                  "wallet_world.p_merge", "--values", "0.1,0.6",
                  "--seeds", "2", "--metric", "deanon.recall")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "value,mean,ci_low,ci_high,n"
    assert len(lines) == 3
    lo = float(lines[1].split(",")[1])
    hi = float(lines[2].split(",")[1])
    assert hi > lo


def test_cli_sweep_bad_values():
    res = run_cli("sweep", "deanon-clustering", "--param",
                  "wallet_world.p_merge", "--values", "zero")
    assert res.returncode == 1


def test_cli_unknown_scenario_is_validation_failure():
    res = run_cli("run", "missing-scenario")
    assert res.returncode == 1
