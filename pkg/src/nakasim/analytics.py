"""Closed-form oracles for attack outcomes.

These are independent of the event-driven simulator: they model each
attack as a biased random walk on block counts and are used to
cross-check simulation results. Keeping both routes separate is the
point; neither side is derived from the other.
"""

from __future__ import annotations

import math

from .mining import ValidationError


def _ruin_win_prob(gap: int, q: float, win_at: int, lose_at: int) -> float:
    """Gambler's-ruin probability that a walk starting at ``gap`` hits
    ``win_at`` before ``lose_at``.

    The walk is the attacker lead (attacker blocks minus defender
    blocks); it steps +1 with probability q and -1 with probability
    1 - q. Requires lose_at < gap < win_at handled by clamping.
    """
    if gap >= win_at:
        return 1.0
    if gap <= lose_at:
        return 0.0
    p = 1.0 - q
    if q <= 0:
        return 0.0
    if abs(q - p) < 1e-12:
        return (gap - lose_at) / (win_at - lose_at)
    ratio = p / q
    return ((ratio ** (gap - lose_at) - 1.0)
            / (ratio ** (win_at - lose_at) - 1.0))


def double_spend_success_probability(q: float, n: int,
                                     give_up_deficit: int = 8) -> float:
    """Success probability of the private-chain (brute force) double
    spend against an n-confirmation merchant.

    Protocol being modelled: the paying transaction enters a public
    block; the attacker (hash share q) forks from that block's parent at
    that moment and mines privately. The merchant accepts after the
    public branch reaches n blocks. The attacker publishes as soon as it
    is strictly longer than the public branch with the merchant already
    paid, and abandons once it falls ``give_up_deficit`` blocks behind
    after acceptance (never before).

    Closed form: while the public branch grows to n blocks (n - 1 finds
    beyond the first), the attacker finds k ~ NegBin; afterwards the
    lead performs a two-barrier walk absorbed at +1 (publish) or at
    -give_up_deficit (abandon).
    """
    if not 0 <= q < 1:
        raise ValidationError("attacker share q must be in [0, 1)")
    if n < 1:
        raise ValidationError("brute-force variant needs n >= 1")
    if give_up_deficit <= n:
        raise ValidationError("give_up_deficit must exceed n")
    if q == 0:
        return 0.0
    p = 1.0 - q
    total = 0.0
    # k attacker finds interleaved among the n-1 honest finds that
    # complete the confirmation window: negative binomial mass.
    k = 0
    cdf = 0.0
    while True:
        mass = math.comb(k + n - 2, k) * (p ** (n - 1)) * (q ** k) \
            if n > 1 else (1.0 if k == 0 else 0.0)
        cdf += mass
        gap = k - n  # attacker lead at acceptance time
        total += mass * _ruin_win_prob(gap, q, win_at=1,
                                       lose_at=-give_up_deficit)
        k += 1
        if gap >= 1 and 1.0 - cdf < 1e-15:
            break
        if k > n + 2000:
            total += (1.0 - cdf)  # deep tail is all leads >= +1
            break
    return min(total, 1.0)


def feather_fork_orphan_probability(alpha: float,
                                    give_up_depth: int = 1) -> float:
    """Probability a feather-forking coalition with hash share ``alpha``
    orphans a block it objects to.

    The coalition forks from the offending block's parent, publishes
    when strictly longer, and abandons once the offending branch leads
    by more than ``give_up_depth`` blocks beyond the initial deficit of
    one. Honest miners stay on the first branch they saw, so ties give
    the attacker nothing; this is the exact absorbing-walk value, a
    little below the two-consecutive-wins approximation alpha^2(2-alpha).
    """
    if not 0 <= alpha < 1:
        raise ValidationError("alpha must be in [0, 1)")
    if give_up_depth < 1:
        raise ValidationError("give_up_depth must be >= 1")
    # Lead = attacker length - offending branch length, from -1.
    # Win at +1; abandon at -(1 + give_up_depth).
    return _ruin_win_prob(-1, alpha, win_at=1, lose_at=-(1 + give_up_depth))


def selfish_mining_revenue_share(alpha: float, gamma: float) -> float:
    """Long-run revenue share of a selfish miner with hash share alpha
    when a fraction gamma of honest power mines on its branch during
    ties. Standard state-machine closed form; the simulator's gamma is
    emergent from topology, so this is a reference curve, not an oracle
    for an exact match."""
    a, g = alpha, gamma
    if a <= 0:
        return 0.0
    num = a * (1 - a) ** 2 * (4 * a + g * (1 - 2 * a)) - a ** 3
    den = 1 - a * (1 + (2 - a) * a)
    return num / den


def selfish_mining_threshold(gamma: float) -> float:
    """Hash share above which selfish mining beats honest mining."""
    return (1.0 - gamma) / (3.0 - 2.0 * gamma)


def balance_attack_success_probability(g1_rate: float, g2_rate: float,
                                       duration: float,
                                       mean_interval: float = 600.0,
                                       trials: int = 100_000,
                                       rng=None) -> float:
    """Monte Carlo random-walk oracle for the partition race: probability
    the second group's chain is strictly longer when the partition heals.

    Block counts on each side over the partition window are independent
    Poisson draws with rates proportional to each side's hash share.
    """
    import numpy as np
    if rng is None:
        rng = np.random.default_rng(0)
    lam1 = g1_rate * duration / mean_interval
    lam2 = g2_rate * duration / mean_interval
    n1 = rng.poisson(lam1, trials)
    n2 = rng.poisson(lam2, trials)
    return float(np.mean(n2 > n1))


def empty_block_find_probability(hash_share: float, window: float,
                                 mean_interval: float = 600.0) -> float:
    """Chance a miner finds a block inside one header-to-validated
    window while it is mining an empty template."""
    return 1.0 - math.exp(-hash_share * window / mean_interval)


def expected_infiltrated_pool_share(honest_hash: float,
                                    infiltrator_hash: float) -> float:
    """Fraction of an infiltrated pool's revenue kept by its honest
    members: blocks come only from honest hash, shares dilute across
    everyone, so honest members keep H / (H + I)."""
    if honest_hash <= 0:
        raise ValidationError("pool must have honest hash")
    return honest_hash / (honest_hash + infiltrator_hash)
