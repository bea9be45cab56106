#!/usr/bin/env python3
"""Transaction censorship by forking.

A majority coalition (punitive forking) simply never mines on a chain
carrying blacklisted transactions: none survive. A 20% coalition
(feather forking) only wins the occasional race, but announcing the
policy changes other miners' expected values: a fraction of a BTC in
fees is not worth a ~5% chance of losing a 25 BTC block, so
profit-rational miners drop the blacklisted transactions voluntarily.
"""

from nakasim import run_scenario
from nakasim.analytics import feather_fork_orphan_probability

SCALE = {"horizon.blocks": 2500, "injections.0.count": 440}


def windowed_rate(name, seeds, overrides):
    vals = []
    for seed in seeds:
        rep = run_scenario(name, seed=seed, overrides=overrides)
        vals.append(rep["censorship"]["windowed_inclusion_rate"])
    return sum(vals) / len(vals)


def main():
    print("=" * 64)
    print("Punitive forking at 60% of the hash rate")
    print("=" * 64)
    rep = run_scenario("punitive-censorship", seed=1, overrides=SCALE)
    c = rep["censorship"]
    print(f"blacklisted txs issued: {c['issued']}, on the final main "
          f"chain: {c['on_main_chain']}")
    print()
    print("=" * 64)
    print("Feather forking at 20% with a rational-miner response")
    print("=" * 64)
    p = feather_fork_orphan_probability(0.2, 1)
    print(f"orphaning chance per offending block: {p:.4f}")
    print(f"expected loss from including one blacklisted tx: "
          f"{p * 25.25:.2f} BTC vs a fee gain of 0.0001 BTC")
    seeds = range(1, 6)
    attack = windowed_rate("feather-fork-censorship", seeds, SCALE)
    baseline = windowed_rate("feather-fork-censorship", seeds, {
        **SCALE, "strategies.feather.kind": "honest",
        "strategies.ev_miner.rational_response": None})
    print(f"timely inclusion of blacklisted txs: {attack:.2%} under "
          f"attack vs {baseline:.2%} baseline")


if __name__ == "__main__":
    main()
