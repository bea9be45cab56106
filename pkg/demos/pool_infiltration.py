#!/usr/bin/env python3
"""Undermining a rival pool from the inside.

A mole contributes 5 points of hash to a 30-point pool, submits partial
proofs-of-work like everyone else, and earns its proportional cut of
the pool's revenue. Block withholding (BWH) simply discards the full
blocks it finds; fork-after-withholding (FAW) saves the newest one and
submits it through the pool manager the moment an outsider publishes,
so the pool sometimes wins the manufactured fork and the mole gets a
share of blocks it would otherwise have thrown away.
"""

from nakasim import run_scenario
from nakasim.analytics import expected_infiltrated_pool_share

SEEDS = range(1, 9)


def main():
    print("=" * 64)
    print("Victim pool: 30% honest hash + 5% mole")
    print("=" * 64)
    rows = {}
    for name in ("withholding-bwh", "withholding-faw"):
        ratio_sum, mole_sum, forks = 0.0, 0.0, 0
        for seed in SEEDS:
            rep = run_scenario(name, seed=seed)
            pool = rep["pools"]["victim"]
            honest_rev = sum(pool["distributed"][m]
                             for m in ("v1", "v2", "v3"))
            out = rep["miners"]["out1"]
            ratio_sum += (honest_rev / 0.30) / (out["revenue_btc"]
                                                / out["hash_share"])
            mole_sum += pool["distributed"]["mole"]
            forks += pool["blocks_submitted"]["mole"]
        rows[name] = (ratio_sum / len(SEEDS), mole_sum / len(SEEDS),
                      forks / len(SEEDS))
    oracle = expected_infiltrated_pool_share(0.30, 0.05)
    print(f"{'attack':>16} | {'victim rev/hash':>15} | "
          f"{'mole BTC':>9} | {'forks':>6}")
    print("-" * 56)
    for name, (ratio, mole, forks) in rows.items():
        print(f"{name:>16} | {ratio:>15.4f} | {mole:>9.0f} | "
              f"{forks:>6.0f}")
    print(f"{'oracle':>16} | {oracle:>15.4f} | {'':>9} | {'':>6}")
    print()
    print("Under BWH the victim's honest members keep H/(H+I) = 85.7%")
    print("of fair revenue per unit of hash. FAW pays the mole strictly")
    print("more than BWH: the manufactured forks win often enough that")
    print("withheld blocks are no longer a pure loss.")


if __name__ == "__main__":
    main()
