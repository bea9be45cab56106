#!/usr/bin/env python3
"""Network-control attacks: the balance attack and eclipse-assisted
sabotage.

Balance attack: cut the miners into two groups, pay a merchant on the
slower side, respend on the other, then throw the attacker's hash
behind the respend side before healing the cut. A 15% attacker reverses
paid transactions most of the time.

Eclipse-assisted sabotage: a 40% attacker mining only empty blocks
swallows the blocks of victims holding another 25 points of hash; among
what survives it holds an effective majority.
"""

from nakasim import run_scenario


def main():
    print("=" * 64)
    print("Balance attack (attacker 15%, groups 45% / 40%)")
    print("=" * 64)
    wins = 0
    n = 10
    for seed in range(1, n + 1):
        rep = run_scenario("balance-attack", seed=seed)
        wins += rep["attacks"]["balance_attack"]["successes"]
    print(f"merchant-paid transaction reversed in {wins}/{n} runs")
    print("(a 15% miner alone would reverse a 2-conf payment well under"
          " 1% of the time)")
    print()
    print("=" * 64)
    print("Goldfinger sabotage with and without eclipse support")
    print("=" * 64)
    for label, overrides in (
            ("eclipse swallows 25 points of honest hash", None),
            ("no eclipse", {"control": [], "horizon.blocks": 2000})):
        rep = run_scenario("eclipse-goldfinger", seed=1,
                           overrides=overrides)
        a = rep["attacks"]["goldfinger"]
        print(f"{label}: attacker main-chain share "
              f"{a['attacker_main_share']:.3f}, honest blocks orphaned "
              f"{a['honest_orphaned_blocks']}")
    print()
    print("40/(100-25) = 53%: the eclipse turns a minority saboteur")
    print("into an effective majority, and every one of its blocks is")
    print("empty, so chain throughput halves.")


if __name__ == "__main__":
    main()
