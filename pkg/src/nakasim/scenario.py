"""Scenario files: loading, validation, defaults, and wiring a
Simulation together.

A scenario is a single JSON document. Every default the loader fills in
is recorded and echoed into the run report, so a report always carries
the fully resolved configuration it was produced from.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .chain import SimTransaction
from .engine import ControlAction, MerchantModel, Simulation
from .mining import (MinerSpec, PoolSpec, ValidationError,
                     validate_population)
from .network import (LinkProfile, Topology, INTRA_PROFILE, CROSS_PROFILE,
                      random_graph, star, two_cliques)
from .strategies import STRATEGIES, make_strategy


class ScenarioError(ValidationError):
    """A scenario file failed validation; the message names the field."""


_DEFAULTS = {
    "seed": 1,
    "mean_block_interval_s": 600.0,
    "block_reward_btc": 25.0,
    "validation_s_per_mb": 0.2,
    "ppows_per_block": 100,
    "relay": {"mode": "full", "switch_at_s": None, "switch_to": "compact"},
    "mempool": {"rate_tps": 0.0, "tx_bytes": 400, "fee_btc": 0.0001},
    "miners": [],
    "pools": [],
    "strategies": {},
    "control": [],
    "injections": [],
    "merchants": [],
    "observers": [],
}

_KNOWN_KEYS = set(_DEFAULTS) | {
    "name", "description", "notes", "horizon", "topology", "wallet_world",
}


@dataclass
class Scenario:
    """A fully resolved experiment description.

    ``raw`` has every default and derived share materialized; ``source``
    is the document as authored (with "rest" markers intact), which is
    what parameter edits re-resolve from.
    """

    raw: dict
    defaults_applied: list = field(default_factory=list)
    source: dict = None

    @property
    def name(self) -> str:
        return self.raw["name"]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    def __getitem__(self, key):
        return self.raw[key]

    def get(self, key, default=None):
        return self.raw.get(key, default)

    @property
    def is_analysis_only(self) -> bool:
        return "wallet_world" in self.raw and "topology" not in self.raw

    def copy(self) -> "Scenario":
        return Scenario(copy.deepcopy(self.raw),
                        list(self.defaults_applied),
                        copy.deepcopy(self.source))


def shipped_scenario_names() -> list[str]:
    files = resources.files("nakasim.scenarios")
    return sorted(p.name[:-5] for p in files.iterdir()
                  if p.name.endswith(".json"))


def load_scenario(path_or_name: str) -> Scenario:
    """Load a scenario from a file path or a shipped scenario name.

    Parse errors carry the line/column; validation errors name the
    violated constraint.
    """
    import os
    if os.path.exists(path_or_name):
        text = open(path_or_name, "r", encoding="utf-8").read()
        source = path_or_name
    else:
        name = path_or_name.removesuffix(".json")
        if name in shipped_scenario_names():
            text = (resources.files("nakasim.scenarios") / f"{name}.json") \
                .read_text(encoding="utf-8")
            source = f"shipped:{name}"
        else:
            raise ScenarioError(
                f"scenario {path_or_name!r} is neither a file nor a "
                f"shipped scenario (see list-scenarios)")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"{source}: parse error at line {e.lineno} column {e.colno}: "
            f"{e.msg}") from e
    return resolve_scenario(doc)


def resolve_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    source = copy.deepcopy(doc)
    doc = copy.deepcopy(doc)
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
    if "name" not in doc:
        raise ScenarioError("scenario needs a name")

    applied = []
    for key, default in _DEFAULTS.items():
        if key not in doc:
            doc[key] = copy.deepcopy(default)
            applied.append(key)
        elif isinstance(default, dict):
            for sub, val in default.items():
                if sub not in doc[key]:
                    doc[key][sub] = val
                    applied.append(f"{key}.{sub}")

    _resolve_rest_shares(doc)
    validate_scenario(doc)
    return Scenario(doc, applied, source)


def _resolve_rest_shares(doc: dict):
    miners = doc.get("miners", [])
    rest = [m for m in miners if m.get("hash_share") == "rest"]
    if rest:
        explicit = sum(float(m["hash_share"]) for m in miners
                       if m.get("hash_share") != "rest")
        remainder = 1.0 - explicit
        if remainder < -1e-9:
            raise ScenarioError("explicit hash shares exceed 1")
        for m in rest:
            m["hash_share"] = max(remainder, 0.0) / len(rest)


def validate_scenario(doc: dict):
    if doc.get("wallet_world") is not None:
        ww = doc["wallet_world"]
        for key in ("users", "addrs_per_user", "txs"):
            if key not in ww or int(ww[key]) < 1:
                raise ScenarioError(f"wallet_world.{key} must be >= 1")
        pm = ww.get("p_merge", 0.0)
        if not 0 <= pm <= 1:
            raise ScenarioError("wallet_world.p_merge must be in [0, 1]")
        if "topology" not in doc:
            return

    if "topology" not in doc:
        raise ScenarioError("scenario needs a topology")
    horizon = doc.get("horizon")
    if not horizon or not (horizon.get("blocks") or horizon.get("seconds")):
        raise ScenarioError("horizon must give blocks or seconds > 0")
    if horizon.get("blocks") is not None and horizon["blocks"] <= 0:
        raise ScenarioError("horizon.blocks must be > 0")

    node_ids = set(_topology_node_ids(doc["topology"]))
    try:
        miners = [MinerSpec(m["miner_id"], float(m["hash_share"]),
                            m.get("region", "default"),
                            m.get("strategy", "honest"), m.get("pool"))
                  for m in doc["miners"]]
        pools = [PoolSpec(p["pool_id"], p.get("manager_region", "default"),
                          tuple(p.get("members", ())))
                 for p in doc["pools"]]
        validate_population(miners, pools)
    except ScenarioError:
        raise
    except ValidationError as e:
        raise ScenarioError(str(e)) from e
    for m in miners:
        if m.miner_id not in node_ids:
            raise ScenarioError(
                f"miner {m.miner_id} has no node in the topology")
        if m.strategy_id != "honest" and \
                m.strategy_id not in doc["strategies"]:
            raise ScenarioError(
                f"miner {m.miner_id} references undefined strategy "
                f"{m.strategy_id!r}")
    for sid, spec in doc["strategies"].items():
        kind = spec.get("kind")
        if kind not in STRATEGIES:
            raise ScenarioError(
                f"strategies.{sid}.kind: unknown strategy kind {kind!r}")
    for mdef in doc["merchants"]:
        if mdef["node"] not in node_ids:
            raise ScenarioError(
                f"merchant node {mdef['node']} not in topology")
        if int(mdef.get("confirmations", 0)) < 0:
            raise ScenarioError("merchant confirmations must be >= 0")
    for obs in doc["observers"]:
        if obs not in node_ids:
            raise ScenarioError(f"observer node {obs} not in topology")
    mode = doc["relay"]["mode"]
    if mode not in ("full", "compact"):
        raise ScenarioError(f"relay.mode must be full or compact, not {mode!r}")


def _topology_node_ids(tspec: dict) -> list:
    kind = tspec.get("kind")
    if kind == "two_cliques":
        return list(tspec["inside"]) + list(tspec["outside"])
    if kind == "explicit":
        return [n["id"] for n in tspec["nodes"]]
    if kind == "star":
        return [tspec["hub"]] + list(tspec["leaves"])
    if kind == "random":
        n = tspec["nodes"]
        return [f"n{i}" for i in range(n)] if isinstance(n, int) else list(n)
    raise ScenarioError(f"unknown topology kind {kind!r}")


def _profile(d: Optional[dict], fallback: LinkProfile) -> LinkProfile:
    if d is None:
        return fallback
    return LinkProfile(latency=float(d.get("latency", fallback.latency)),
                       bandwidth=float(d.get("bandwidth",
                                             fallback.bandwidth)),
                       loss=float(d.get("loss", fallback.loss)))


def build_topology(tspec: dict, seed: int) -> Topology:
    kind = tspec.get("kind")
    profiles = tspec.get("profiles", {})
    if kind == "two_cliques":
        return two_cliques(
            tspec["inside"], tspec["outside"],
            inside_region=tspec.get("inside_region", "inside"),
            outside_region=tspec.get("outside_region", "outside"),
            intra=_profile(profiles.get("intra"), INTRA_PROFILE),
            cross=_profile(profiles.get("cross"), CROSS_PROFILE),
            boundary_pairs=[tuple(p) for p in tspec["boundary_pairs"]]
            if "boundary_pairs" in tspec else None)
    if kind == "star":
        return star(tspec["hub"], tspec["leaves"],
                    _profile(profiles.get("link"), INTRA_PROFILE),
                    region=tspec.get("region", "default"))
    if kind == "random":
        ids = _topology_node_ids(tspec)
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, 0x7090]))
        return random_graph(
            ids, int(tspec.get("degree", 4)), rng,
            latency_range=tuple(tspec.get("latency_range", (0.02, 0.3))),
            region=tspec.get("region", "default"))
    if kind == "explicit":
        topo = Topology()
        for n in tspec["nodes"]:
            topo.add_node(n["id"], n.get("region", "default"))
        for e in tspec["edges"]:
            topo.add_edge(e["a"], e["b"],
                          _profile(e, INTRA_PROFILE))
        return topo
    raise ScenarioError(f"unknown topology kind {kind!r}")


def _expand_injections(doc: dict, seed: int, topo: Topology) -> list:
    """Turn injection specs into concrete (time, origin, tx) triples."""
    out = []
    counter = 0
    for spec in doc["injections"]:
        kind = spec.get("kind", "tx")
        if kind == "tx":
            t = spec["tx"]
            tx = SimTransaction(
                tx_id=t["tx_id"],
                inputs=tuple((a, r) for a, r in t.get("inputs", ())),
                outputs=tuple((a, v) for a, v in t.get("outputs", ())),
                fee=float(t.get("fee", doc["mempool"]["fee_btc"])),
                origin_node=spec["origin"],
                created_at=float(spec["at"]),
                censored=bool(t.get("censored", False)),
                size_bytes=int(t.get("size_bytes",
                                     doc["mempool"]["tx_bytes"])))
            out.append((float(spec["at"]), spec["origin"], tx))
        elif kind == "censored_stream":
            start = float(spec.get("start", 0.0))
            period = float(spec["period"])
            count = int(spec["count"])
            addr = spec.get("address", "blk:target")
            for i in range(count):
                at = start + i * period
                tx = SimTransaction(
                    tx_id=f"cen{counter}", inputs=((addr, counter),),
                    outputs=((f"addr:dest{counter}", 1.0),),
                    fee=float(spec.get("fee", doc["mempool"]["fee_btc"])),
                    origin_node=spec["origin"], created_at=at,
                    censored=True)
                out.append((at, spec["origin"], tx))
                counter += 1
        elif kind == "random_traffic":
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, 0x7af1c]))
            origins = spec.get("origins", "all")
            if origins == "all":
                origins = topo.nodes
            start = float(spec.get("start", 0.0))
            rate = float(spec["rate_tps"])
            count = int(spec["count"])
            t = start
            for i in range(count):
                t += float(rng.exponential(1.0 / rate))
                origin = origins[int(rng.integers(len(origins)))]
                tx = SimTransaction(
                    tx_id=f"rt{i}", inputs=((f"rtaddr{i}", i),),
                    outputs=((f"addr:sink{i}", 1.0),),
                    fee=doc["mempool"]["fee_btc"],
                    origin_node=origin, created_at=t)
                out.append((t, origin, tx))
        else:
            raise ScenarioError(f"unknown injection kind {kind!r}")
    return out


def build_simulation(scenario: Scenario, seed: Optional[int] = None
                     ) -> Simulation:
    """Assemble a runnable Simulation from a resolved scenario."""
    doc = scenario.raw
    run_seed = scenario["seed"] if seed is None else seed
    topo = build_topology(doc["topology"], run_seed)
    if not topo.is_connected():
        raise ScenarioError("topology must be connected at scenario start")

    miners = [MinerSpec(m["miner_id"], float(m["hash_share"]),
                        m.get("region",
                              topo.regions.get(m["miner_id"], "default")),
                        m.get("strategy", "honest"), m.get("pool"))
              for m in doc["miners"]]
    pools = [PoolSpec(p["pool_id"], p.get("manager_region", "default"),
                      tuple(p.get("members", ())))
             for p in doc["pools"]]
    control = [ControlAction(c["kind"], float(c["at"]),
                             {k: v for k, v in c.items()
                              if k not in ("kind", "at")})
               for c in doc["control"]]
    merchants = [MerchantModel(m["node"], int(m.get("confirmations", 0)))
                 for m in doc["merchants"]]
    horizon = doc.get("horizon", {})

    sim = Simulation(
        topology=topo, miners=miners, seed=run_seed, pools=pools,
        mean_interval=doc["mean_block_interval_s"],
        block_reward=doc["block_reward_btc"],
        mempool_rate_tps=doc["mempool"]["rate_tps"],
        mempool_tx_bytes=doc["mempool"]["tx_bytes"],
        mempool_tx_fee=doc["mempool"]["fee_btc"],
        relay_mode=doc["relay"]["mode"],
        relay_switch_at=doc["relay"].get("switch_at_s"),
        relay_switch_to=doc["relay"].get("switch_to", "compact"),
        validation_s_per_mb=doc["validation_s_per_mb"],
        ppows_per_block=doc["ppows_per_block"],
        horizon_blocks=horizon.get("blocks"),
        horizon_seconds=horizon.get("seconds"),
        control=control, merchants=merchants,
        observers=doc["observers"])

    for mr in sim.miners:
        sid = mr.spec.strategy_id
        spec = doc["strategies"].get(sid, {"kind": "honest"})
        params = {k: v for k, v in spec.items() if k != "kind"}
        mr.node.strategy = make_strategy(spec.get("kind", "honest"),
                                         sim, mr.node, params)
    sim.injections_pending = _expand_injections(doc, run_seed, topo)
    return sim
