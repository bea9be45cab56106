"""Scenario loading, validation, defaults, provenance."""

import json

import pytest

from nakasim import load_scenario, run_scenario, shipped_scenario_names
from nakasim.scenario import ScenarioError, resolve_scenario

SHIPPED = [
    "balance-attack", "bip152-switch", "deanon-clustering",
    "deanon-origin", "double-spend-brute", "double-spend-finney",
    "double-spend-race", "eclipse-goldfinger", "feather-fork-censorship",
    "gfw-empty-blocks-2015", "punitive-censorship", "selfish-sweep",
    "withholding-bwh", "withholding-faw",
]

TABLE1 = {"f2pool": 0.2217, "antpool": 0.2154, "btcc": 0.1279,
          "bitfury": 0.1239, "bwpool": 0.0784, "kncminer": 0.0489,
          "slushpool": 0.0472, "inc21": 0.0227}


def test_all_shipped_scenarios_exist_and_load():
    assert shipped_scenario_names() == SHIPPED
    for name in SHIPPED:
        scenario = load_scenario(name)
        assert scenario.name == name


def test_gfw_scenario_ships_2015_pool_population():
    scenario = load_scenario("gfw-empty-blocks-2015")
    shares = {m["miner_id"]: m["hash_share"]
              for m in scenario["miners"]}
    for pool, share in TABLE1.items():
        assert shares[pool] == pytest.approx(share)
    regions = {m["miner_id"]: m["region"] for m in scenario["miners"]}
    assert regions["f2pool"] == "china"
    assert regions["bitfury"] == "overseas"
    # the remainder runs as honest background hash
    assert shares["background"] == pytest.approx(1 - sum(TABLE1.values()))


def test_share_sum_must_be_one():
    doc = {"name": "bad", "horizon": {"blocks": 10},
           "topology": {"kind": "explicit",
                        "nodes": [{"id": "a"}, {"id": "b"}],
                        "edges": [{"a": "a", "b": "b", "latency": 0.1}]},
           "miners": [{"miner_id": "a", "hash_share": 0.5},
                      {"miner_id": "b", "hash_share": 0.4}]}
    with pytest.raises(ScenarioError, match="sum to 1"):
        resolve_scenario(doc)


def test_unknown_strategy_kind_names_the_field():
    doc = {"name": "bad", "horizon": {"blocks": 10},
           "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                        "edges": []},
           "miners": [{"miner_id": "a", "hash_share": 1.0,
                       "strategy": "mystery"}],
           "strategies": {"mystery": {"kind": "time_warp"}}}
    with pytest.raises(ScenarioError, match="strategies.mystery.kind"):
        resolve_scenario(doc)


def test_undefined_strategy_reference_rejected():
    doc = {"name": "bad", "horizon": {"blocks": 10},
           "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                        "edges": []},
           "miners": [{"miner_id": "a", "hash_share": 1.0,
                       "strategy": "ghost"}]}
    with pytest.raises(ScenarioError, match="ghost"):
        resolve_scenario(doc)


def test_parse_error_is_position_annotated(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n  "horizon": }\n')
    with pytest.raises(ScenarioError, match=r"line 2 column"):
        load_scenario(str(path))


def test_unknown_scenario_name_rejected():
    with pytest.raises(ScenarioError, match="neither a file"):
        load_scenario("no-such-scenario")


def test_unknown_top_level_field_rejected():
    with pytest.raises(ScenarioError, match="unknown scenario fields"):
        resolve_scenario({"name": "x", "horizon": {"blocks": 1},
                          "typo_field": 1})


def test_horizon_required_and_positive():
    base = {"name": "x",
            "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                         "edges": []},
            "miners": [{"miner_id": "a", "hash_share": 1.0}]}
    with pytest.raises(ScenarioError, match="horizon"):
        resolve_scenario(dict(base))
    with pytest.raises(ScenarioError, match="horizon"):
        resolve_scenario(dict(base, horizon={"blocks": 0}))


def test_merchant_and_observer_nodes_must_exist():
    base = {"name": "x", "horizon": {"blocks": 5},
            "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                         "edges": []},
            "miners": [{"miner_id": "a", "hash_share": 1.0}]}
    with pytest.raises(ScenarioError, match="merchant"):
        resolve_scenario(dict(base, merchants=[{"node": "ghost",
                                                "confirmations": 1}]))
    with pytest.raises(ScenarioError, match="observer"):
        resolve_scenario(dict(base, observers=["ghost"]))


def test_rest_shares_split_remainder_equally():
    doc = {"name": "rest", "horizon": {"blocks": 5},
           "topology": {"kind": "explicit",
                        "nodes": [{"id": "a"}, {"id": "b"},
                                  {"id": "c"}],
                        "edges": [{"a": "a", "b": "b", "latency": 0.1},
                                  {"a": "b", "b": "c", "latency": 0.1}]},
           "miners": [{"miner_id": "a", "hash_share": 0.5},
                      {"miner_id": "b", "hash_share": "rest"},
                      {"miner_id": "c", "hash_share": "rest"}]}
    scenario = resolve_scenario(doc)
    assert scenario["miners"][1]["hash_share"] == pytest.approx(0.25)
    assert scenario["miners"][2]["hash_share"] == pytest.approx(0.25)
    # the as-authored document keeps the markers for re-resolution
    assert scenario.source["miners"][1]["hash_share"] == "rest"


def test_defaults_are_recorded_and_echoed():
    doc = {"name": "defs", "horizon": {"blocks": 5},
           "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                        "edges": []},
           "miners": [{"miner_id": "a", "hash_share": 1.0}]}
    scenario = resolve_scenario(doc)
    assert "seed" in scenario.defaults_applied
    assert "mempool" in scenario.defaults_applied
    rep = run_scenario(scenario)
    prov = rep["provenance"]
    assert prov["defaults_applied"] == scenario.defaults_applied
    # every applied default is materialized in the echoed scenario
    for path in prov["defaults_applied"]:
        cur = prov["resolved_scenario"]
        for part in path.split("."):
            assert part in cur
            cur = cur[part]


def test_wallet_world_validation():
    with pytest.raises(ScenarioError, match="wallet_world.users"):
        resolve_scenario({"name": "w",
                          "wallet_world": {"users": 0,
                                           "addrs_per_user": 2,
                                           "txs": 5}})
    with pytest.raises(ScenarioError, match="p_merge"):
        resolve_scenario({"name": "w",
                          "wallet_world": {"users": 5,
                                           "addrs_per_user": 2,
                                           "txs": 5, "p_merge": 2.0}})


def test_disconnected_topology_rejected():
    doc = {"name": "disc", "horizon": {"blocks": 5},
           "topology": {"kind": "explicit",
                        "nodes": [{"id": "a"}, {"id": "b"}],
                        "edges": []},
           "miners": [{"miner_id": "a", "hash_share": 1.0}]}
    with pytest.raises(ScenarioError, match="connected"):
        run_scenario(doc)


def test_bad_relay_mode_rejected():
    doc = {"name": "relay", "horizon": {"blocks": 5},
           "relay": {"mode": "pigeon"},
           "topology": {"kind": "explicit", "nodes": [{"id": "a"}],
                        "edges": []},
           "miners": [{"miner_id": "a", "hash_share": 1.0}]}
    with pytest.raises(ScenarioError, match="relay.mode"):
        resolve_scenario(doc)
