"""nakasim: a deterministic discrete-event simulator of Nakamoto
consensus over a region-aware peer network.

The package models proof-of-work mining as a memoryless race, block and
transaction relay over links with latency, bandwidth and loss, a
firewall boundary between regions, and the classic attack strategies
that operate through mining or network control (selfish mining,
censorship forking, double spends, partition and eclipse attacks, pool
infiltration), plus address-clustering and traffic-origin
deanonymization analytics.
"""

from .chain import (ChainView, RewardLedger, SimBlock, SimTransaction,
                    TemplatePolicy, assemble_template, settle_rewards)
from .engine import ControlAction, MerchantModel, Simulation
from .harness import replicate, run_scenario, sweep
from .metrics import build_report, emit_csv, emit_json, summary_text
from .mining import (MinerSpec, PoolSpec, ShareRecord, ValidationError,
                     distribute_pool_rewards, sample_next_find)
from .network import EventQueue, LinkProfile, Topology, transfer_time
from .scenario import (Scenario, build_simulation, load_scenario,
                       resolve_scenario, shipped_scenario_names)

__version__ = "0.1.0"

__all__ = [
    "ChainView", "ControlAction", "EventQueue", "LinkProfile",
    "MerchantModel", "MinerSpec", "PoolSpec", "RewardLedger", "Scenario",
    "ShareRecord", "SimBlock", "SimTransaction", "Simulation",
    "TemplatePolicy", "Topology", "ValidationError", "assemble_template",
    "build_report", "build_simulation", "distribute_pool_rewards",
    "emit_csv", "emit_json", "load_scenario", "replicate",
    "resolve_scenario", "run_scenario", "sample_next_find",
    "settle_rewards", "shipped_scenario_names", "summary_text", "sweep",
    "transfer_time",
]
