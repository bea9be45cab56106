"""Stochastic block discovery, pools, and partial proof-of-work shares.

Mining is a memoryless race: each miner's waiting time to its next find
is exponential with rate hash_share / mean_interval, so find times never
need resampling when the mining target changes. Every miner draws from
its own deterministic substream keyed by (seed, miner_id), which keeps
runs reproducible and lets seed sweeps parallelize with no coordination.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_MEAN_INTERVAL = 600.0
DEFAULT_PPOWS_PER_BLOCK = 100
SHARE_SUM_TOL = 1e-9


class ValidationError(Exception):
    """A scenario or parameter constraint was violated; the message
    names the constraint."""


@dataclass
class MinerSpec:
    miner_id: str
    hash_share: float
    region: str = "default"
    strategy_id: str = "honest"
    pool_id: Optional[str] = None

    def __post_init__(self):
        if self.hash_share < 0:
            raise ValidationError(
                f"miner {self.miner_id}: hash_share must be >= 0")


@dataclass
class PoolSpec:
    pool_id: str
    manager_region: str = "default"
    members: tuple = ()
    reward_scheme: str = "proportional"


@dataclass
class ShareRecord:
    """Shares and block submissions one pool member has accumulated.
    Withholding makes submitted < found."""

    miner_id: str
    pool_id: str
    ppow_count: int = 0
    full_blocks_found: int = 0
    full_blocks_submitted: int = 0


def validate_population(miners: list[MinerSpec],
                        pools: list[PoolSpec] = ()) -> None:
    """Check the invariants a scenario's miner population must satisfy."""
    ids = [m.miner_id for m in miners]
    if len(set(ids)) != len(ids):
        raise ValidationError("miner ids must be unique")
    total = sum(m.hash_share for m in miners)
    if miners and abs(total - 1.0) > SHARE_SUM_TOL:
        raise ValidationError(
            f"hash shares must sum to 1 (got {total:.12f})")
    seen = set()
    for pool in pools:
        for member in pool.members:
            if member in seen:
                raise ValidationError(
                    f"miner {member} belongs to more than one pool")
            seen.add(member)
            if member not in ids:
                raise ValidationError(
                    f"pool {pool.pool_id} references unknown miner {member}")


def miner_rng(seed: int, miner_id: str) -> np.random.Generator:
    """Deterministic per-miner substream: keyed by run seed and a stable
    hash of the miner id (not Python's salted hash)."""
    key = zlib.crc32(miner_id.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([seed, key]))


def sample_next_find(hash_share: float, mean_interval: float,
                     rng: np.random.Generator) -> float:
    """Waiting time until the miner's next block find.

    A zero hash share never fires (returns infinity).
    """
    if mean_interval <= 0:
        raise ValidationError("mean_interval must be > 0")
    if hash_share == 0.0:
        return math.inf
    return float(rng.exponential(mean_interval / hash_share))


class FindStream:
    """Batched exponential draws for one miner's find times."""

    def __init__(self, hash_share: float, mean_interval: float,
                 rng: np.random.Generator, batch: int = 1024):
        self.scale = (mean_interval / hash_share) if hash_share > 0 else None
        self.rng = rng
        self.batch = batch
        self._buf = np.empty(0)
        self._i = 0

    def next(self) -> float:
        if self.scale is None:
            return math.inf
        if self._i >= len(self._buf):
            self._buf = self.rng.exponential(self.scale, self.batch)
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return float(v)


def sample_ppows(hash_share: float, duration: float, mean_interval: float,
                 ppows_per_block: int, rng: np.random.Generator) -> int:
    """Partial proofs-of-work a miner produced over ``duration`` seconds.

    Poisson-thinned counter: only the proportionality to work performed
    matters, so sub-target hashes are not simulated individually.
    """
    if ppows_per_block < 1:
        raise ValidationError("ppows_per_block must be >= 1")
    lam = ppows_per_block * hash_share * duration / mean_interval
    return int(rng.poisson(lam))


def record_share(record: ShareRecord, ppows: int = 0, found: int = 0,
                 submitted: int = 0) -> None:
    record.ppow_count += ppows
    record.full_blocks_found += found
    record.full_blocks_submitted += submitted
    if record.full_blocks_submitted > record.full_blocks_found:
        raise ValidationError(
            f"{record.miner_id}: submitted more blocks than found")


def distribute_pool_rewards(pool: PoolSpec, records: list[ShareRecord],
                            pool_revenue: float) -> dict[str, float]:
    """Split the pool's settled revenue across members in proportion to
    their PPoW counts."""
    records = [r for r in records if r.pool_id == pool.pool_id]
    total = sum(r.ppow_count for r in records)
    if total == 0:
        if pool_revenue > 0:
            raise ValidationError(
                f"pool {pool.pool_id}: revenue with zero recorded shares")
        return {r.miner_id: 0.0 for r in records}
    return {r.miner_id: pool_revenue * r.ppow_count / total
            for r in records}
