"""Experiment harness: single runs, seed replication, and parameter
sweeps with seed-level confidence intervals.

Each (scenario, seed) cell is an isolated run; sweeps aggregate cells in
a deterministic order, so a cell's result never depends on which other
cells ran.
"""

from __future__ import annotations

import copy
from typing import Optional

import numpy as np

from . import deanon
from .metrics import build_report, mean_ci
from .mining import ValidationError
from .scenario import (Scenario, build_simulation, build_topology,
                       load_scenario, resolve_scenario)


def run_scenario(scenario, seed: Optional[int] = None,
                 overrides: Optional[dict] = None) -> dict:
    """Run one scenario (path, name, dict, or Scenario) and return its
    report. ``overrides`` are dotted-path scenario edits applied before
    validation."""
    scenario = _coerce(scenario)
    if overrides:
        doc = copy.deepcopy(scenario.source or scenario.raw)
        for path, value in overrides.items():
            set_by_path(doc, path, value)
        scenario = resolve_scenario(doc)
    if scenario.is_analysis_only:
        return run_analysis(scenario, seed)
    sim = build_simulation(scenario, seed)
    sim.run()
    report = build_report(sim, scenario, seed)
    if scenario.get("wallet_world"):
        report["deanon"] = _world_analysis(scenario, seed)
    if scenario.get("observers"):
        report["deanon_origin"] = _origin_analysis(sim, scenario)
    return report


def run_analysis(scenario: Scenario, seed: Optional[int] = None) -> dict:
    """Ledger-only scenarios: no network, just wallet-world clustering."""
    return {
        "meta": {"scenario": scenario.name,
                 "seed": scenario["seed"] if seed is None else seed},
        "deanon": _world_analysis(scenario, seed),
        "provenance": {"resolved_scenario": scenario.raw,
                       "defaults_applied": scenario.defaults_applied},
    }


def _world_analysis(scenario: Scenario, seed: Optional[int]) -> dict:
    ww = scenario["wallet_world"]
    run_seed = scenario["seed"] if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence([run_seed, 0xdea]))
    world = deanon.generate_world(
        int(ww["users"]), int(ww["addrs_per_user"]), int(ww["txs"]),
        float(ww.get("p_merge", 0.0)), rng)
    clusters = deanon.cluster_multi_input(world.ledger)
    quality = deanon.clustering_quality(clusters, world.ownership)
    return {"p_merge": float(ww.get("p_merge", 0.0)), **quality}


def _origin_analysis(sim, scenario: Scenario) -> dict:
    truth = {}
    for _, origin, tx in sim.injections_pending:
        truth[tx.tx_id] = origin
    guesses = deanon.infer_origin(sim.observers, sim.topology)
    acc = deanon.origin_accuracy(guesses, truth)
    return {
        "transactions": len(guesses),
        "accuracy": acc,
        "random_baseline": 1.0 / len(sim.nodes) if sim.nodes else 0.0,
    }


def _coerce(scenario) -> Scenario:
    if isinstance(scenario, Scenario):
        return scenario
    if isinstance(scenario, dict):
        return resolve_scenario(scenario)
    return load_scenario(scenario)


def replicate(scenario, seeds) -> list:
    """Run the scenario once per seed; reports in seed order."""
    scenario = _coerce(scenario)
    return [run_scenario(scenario, seed=s) for s in seeds]


def extract(report: dict, path: str):
    """Fetch a value from a report by dotted path."""
    cur = report
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur[part]
    return cur


def aggregate(reports: list, path: str) -> dict:
    return mean_ci([float(extract(r, path)) for r in reports])


def set_by_path(doc, path: str, value):
    """Assign into a nested dict/list structure by dotted path."""
    parts = path.split(".")
    cur = doc
    for part in parts[:-1]:
        cur = cur[int(part)] if isinstance(cur, list) else cur[part]
    last = parts[-1]
    if isinstance(cur, list):
        cur[int(last)] = value
    else:
        cur[last] = value


def get_by_path(doc, path: str):
    cur = doc
    for part in path.split("."):
        cur = cur[int(part)] if isinstance(cur, list) else cur[part]
    return cur


def sweep(scenario, param_path: str, values, seeds,
          metric_path: Optional[str] = None) -> list:
    """Cartesian product of values x seeds.

    Returns one row per value: the per-seed reports' metric (when
    ``metric_path`` is given) reduced to mean and 95% CI, in value
    order. Raises when the parameter path does not address a numeric
    scenario field or the value list is empty.
    """
    scenario = _coerce(scenario)
    if not values:
        raise ValidationError("sweep needs a non-empty value list")
    current = get_by_path(scenario.raw, param_path)
    if not isinstance(current, (int, float)) or isinstance(current, bool):
        raise ValidationError(
            f"sweep parameter {param_path!r} is not numeric "
            f"(found {type(current).__name__})")
    rows = []
    for value in values:
        doc = copy.deepcopy(scenario.source or scenario.raw)
        set_by_path(doc, param_path, value)
        cell_scenario = resolve_scenario(doc)
        reports = [run_scenario(cell_scenario, seed=s) for s in seeds]
        row = {"param": param_path, "value": value,
               "seeds": list(seeds)}
        if metric_path is not None:
            row.update(aggregate(reports, metric_path))
        row["reports"] = reports
        rows.append(row)
    return rows
