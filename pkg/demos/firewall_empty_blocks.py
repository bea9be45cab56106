#!/usr/bin/env python3
"""Why pools behind a slow boundary mine empty blocks, and why compact
relay ends it.

Four pools sit behind a firewall boundary where a full 1 MB block takes
~17.4 s to cross (vs ~3.9 s inside a region). While a foreign block's
body is still in flight they mine on its bare header, which only fits a
coinbase. Outside pools only show the ordinary work-update baseline.
Switching relay to 15 KB sketches makes propagation size-independent
and the incentive disappears.

Scaled to 2,000 blocks x 5 seeds per mode so it runs in seconds; the
full-scale reproduction lives in tests/test_acceptance.py (A1/A2).
"""

from nakasim import run_scenario

SEEDS = range(1, 6)
SCALE = {"horizon.blocks": 2000}


def group_rates(mode):
    totals = {}
    for seed in SEEDS:
        overrides = dict(SCALE)
        if mode == "compact":
            overrides["relay.mode"] = "compact"
        rep = run_scenario("gfw-empty-blocks-2015", seed=seed,
                          overrides=overrides)
        for gid, g in rep["groups"].items():
            cell = totals.setdefault(gid, [0, 0])
            cell[0] += g["empty_main"]
            cell[1] += g["blocks_main"]
    return {gid: c[0] / c[1] for gid, c in totals.items()}


def main():
    print("=" * 64)
    print("Empty-block mining behind a firewall boundary")
    print("=" * 64)
    print(f"{'relay mode':>12} | {'behind boundary':>16} | {'outside':>10}")
    print("-" * 46)
    for mode in ("full", "compact"):
        rates = group_rates(mode)
        print(f"{mode:>12} | {rates['china']:>15.2%} | "
              f"{rates['overseas']:>9.2%}")
    print()
    print("Full 1 MB relay: the boundary group mines empty at several")
    print("times the outside baseline (historical 2015-16 reference:")
    print("3-13% vs 2-3%). Compact sketches collapse the window and the")
    print("rates converge below 3%.")


if __name__ == "__main__":
    main()
