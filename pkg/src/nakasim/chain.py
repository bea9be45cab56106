"""Blocks, transactions, per-node ledger views and reward accounting.

Hashing and signatures are abstracted away: a block is valid by
construction and identified by an opaque integer id. Fork choice is
longest-chain with a first-received tie-break between equal-height tips,
matching deployed client behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

# Protocol-level size constants (bytes). The 1 MB cap is the pre-SegWit
# consensus limit; everything else is a modelling default and can be
# overridden per scenario.
MAX_BLOCK_BYTES = 1_000_000
BLOCK_HEADER_BYTES = 80
COINBASE_BYTES = 120
DEFAULT_TX_BYTES = 400
DEFAULT_TX_FEE = 0.0001
DEFAULT_BLOCK_REWARD = 25.0

GENESIS_ID = 0


class ChainError(Exception):
    """Structural violation while mutating a chain view."""


@dataclass(frozen=True, slots=True)
class SimTransaction:
    """A value transfer between address ids.

    ``inputs`` is a tuple of (address_id, prior_output_ref) pairs and is
    empty exactly for coinbase transactions. ``censored`` marks the
    transaction as a censorship target for filtering strategies.
    """

    tx_id: str
    inputs: tuple = ()
    outputs: tuple = ()
    fee: float = 0.0
    origin_node: Optional[str] = None
    created_at: float = 0.0
    censored: bool = False
    size_bytes: int = DEFAULT_TX_BYTES

    def __post_init__(self):
        if self.fee < 0:
            raise ValueError(f"tx {self.tx_id}: negative fee {self.fee}")
        if any(amount < 0 for _, amount in self.outputs):
            raise ValueError(f"tx {self.tx_id}: negative output amount")

    @property
    def is_coinbase(self) -> bool:
        return not self.inputs

    def addresses(self) -> set:
        """All address ids touched by this transaction."""
        return {a for a, _ in self.inputs} | {a for a, _ in self.outputs}


def coinbase_tx(block_id: int, miner_id: str, amount: float,
                at: float) -> SimTransaction:
    return SimTransaction(
        tx_id=f"cb{block_id}",
        inputs=(),
        outputs=((f"addr:{miner_id}", amount),),
        fee=0.0,
        origin_node=miner_id,
        created_at=at,
        size_bytes=COINBASE_BYTES,
    )


@dataclass(slots=True)
class SimBlock:
    """A mined block.

    ``txs`` holds the coinbase plus any individually tracked
    transactions. Bulk fee-bearing traffic is carried as a count
    (``bulk_txs``) rather than as objects; see the engine's mempool
    model. ``fees`` is the total fee revenue of the block including the
    bulk portion.
    """

    block_id: int
    parent_id: Optional[int]
    height: int
    miner_id: str
    txs: tuple
    size_bytes: int
    found_at: float
    bulk_txs: int = 0
    fees: float = 0.0

    def __post_init__(self):
        if self.size_bytes > MAX_BLOCK_BYTES:
            raise ChainError(
                f"block {self.block_id}: {self.size_bytes} B exceeds "
                f"{MAX_BLOCK_BYTES} B cap")
        if self.size_bytes < BLOCK_HEADER_BYTES:
            raise ChainError(f"block {self.block_id}: smaller than a header")

    @property
    def is_empty(self) -> bool:
        """True when the block carries only its coinbase."""
        return self.bulk_txs == 0 and len(self.txs) <= 1


def genesis_block() -> SimBlock:
    return SimBlock(
        block_id=GENESIS_ID, parent_id=None, height=0, miner_id="genesis",
        txs=(coinbase_tx(GENESIS_ID, "genesis", 0.0, 0.0),),
        size_bytes=BLOCK_HEADER_BYTES + COINBASE_BYTES, found_at=0.0)


@dataclass(slots=True)
class TipReport:
    """Outcome of one insertion: did the best tip move, and how far back
    did the old main chain get rolled back."""

    old_tip: int
    new_tip: int
    reorg_depth: int
    connected: list = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return self.old_tip != self.new_tip


class ChainView:
    """One peer's view of the block tree.

    Blocks whose parent is unknown are buffered in a pending set and only
    join the view (recursively) once the parent arrives. ``first_seen``
    records when each block became part of the connected view, which is
    what the first-received tie-break keys on.
    """

    def __init__(self, genesis: Optional[SimBlock] = None):
        g = genesis if genesis is not None else genesis_block()
        self.blocks: dict[int, SimBlock] = {g.block_id: g}
        self.first_seen: dict[int, float] = {g.block_id: g.found_at}
        self.tips: set[int] = {g.block_id}
        self.best_tip: int = g.block_id
        self._genesis_id = g.block_id
        self._pending: dict[int, list[SimBlock]] = {}

    def __contains__(self, block_id: int) -> bool:
        return block_id in self.blocks

    def height_of(self, block_id: int) -> int:
        return self.blocks[block_id].height

    @property
    def best_height(self) -> int:
        return self.blocks[self.best_tip].height

    def insert(self, block: SimBlock, now: float) -> Optional[TipReport]:
        """Insert ``block`` observed at time ``now``.

        Returns a TipReport, or None when the block is a duplicate
        (no-op). A block whose parent is unknown is buffered and the
        report lists no connected blocks. Raises ChainError on a height
        that does not follow its parent.
        """
        if block.block_id in self.blocks:
            return None
        if any(b.block_id == block.block_id
               for pend in self._pending.values() for b in pend):
            return None

        old_tip = self.best_tip
        if block.parent_id not in self.blocks:
            self._pending.setdefault(block.parent_id, []).append(block)
            return TipReport(old_tip, old_tip, 0, [])

        connected: list[int] = []
        stack = [block]
        while stack:
            blk = stack.pop()
            parent = self.blocks[blk.parent_id]
            if blk.height != parent.height + 1:
                raise ChainError(
                    f"block {blk.block_id} height {blk.height} does not "
                    f"extend parent at height {parent.height}")
            self.blocks[blk.block_id] = blk
            self.first_seen[blk.block_id] = now
            self.tips.discard(blk.parent_id)
            self.tips.add(blk.block_id)
            connected.append(blk.block_id)
            stack.extend(self._pending.pop(blk.block_id, ()))

        new_tip = old_tip
        best_h = self.blocks[old_tip].height
        for bid in connected:
            h = self.blocks[bid].height
            if h > best_h:
                best_h, new_tip = h, bid
            # equal height: keep the earlier-seen tip (first-received)

        reorg = 0
        if new_tip != old_tip:
            reorg = self._rollback_depth(old_tip, new_tip)
            self.best_tip = new_tip
        return TipReport(old_tip, new_tip, reorg, connected)

    def _rollback_depth(self, old_tip: int, new_tip: int) -> int:
        """Number of blocks leaving the main chain when moving the tip."""
        a, b = old_tip, new_tip
        ha, hb = self.blocks[a].height, self.blocks[b].height
        depth = 0
        while hb > ha:
            b = self.blocks[b].parent_id
            hb -= 1
        while a != b:
            a = self.blocks[a].parent_id
            b = self.blocks[b].parent_id
            depth += 1
        return depth

    def main_chain(self, from_tip: Optional[int] = None) -> list[SimBlock]:
        """Blocks from genesis to the tip, in height order."""
        out = []
        bid = self.best_tip if from_tip is None else from_tip
        while bid is not None:
            blk = self.blocks[bid]
            out.append(blk)
            bid = blk.parent_id
        out.reverse()
        return out

    def is_ancestor(self, block_id: int, tip: int) -> bool:
        """True when ``block_id`` lies on the chain ending at ``tip``."""
        h = self.blocks[block_id].height
        cur = tip
        while cur is not None and self.blocks[cur].height > h:
            cur = self.blocks[cur].parent_id
        return cur == block_id


@dataclass
class TemplatePolicy:
    """How a miner fills a block: everything it can, nothing, or
    everything except transactions touching a blacklist."""

    kind: str = "full"          # full | empty | censoring
    blacklist: frozenset = frozenset()

    def admits(self, tx: SimTransaction) -> bool:
        if self.kind == "empty":
            return False
        if self.kind == "censoring":
            if tx.censored or (self.blacklist & tx.addresses()):
                return False
        return True


@dataclass(slots=True)
class Template:
    """Result of packing a mempool: ordered tx list (coinbase excluded,
    it is created at find time) and the size the block will have."""

    txs: list
    size_bytes: int

    @property
    def fees(self) -> float:
        return sum(tx.fee for tx in self.txs)


def assemble_template(mempool: Iterable[SimTransaction],
                      view: ChainView,
                      policy: TemplatePolicy,
                      max_bytes: int = MAX_BLOCK_BYTES) -> Template:
    """Pack mempool transactions highest-fee-first under the size cap.

    Callers guarantee the mempool transactions are individually valid
    against the view's best chain. An empty mempool legitimately yields
    a coinbase-only template.
    """
    base = BLOCK_HEADER_BYTES + COINBASE_BYTES
    chosen: list[SimTransaction] = []
    size = base
    if policy.kind != "empty":
        candidates = [tx for tx in mempool
                      if not tx.is_coinbase and policy.admits(tx)]
        candidates.sort(key=lambda tx: (-tx.fee, tx.tx_id))
        for tx in candidates:
            if size + tx.size_bytes <= max_bytes:
                chosen.append(tx)
                size += tx.size_bytes
    return Template(chosen, size)


@dataclass
class SettlementReport:
    """Per-miner revenue and orphan counts after walking the main chain."""

    revenue: dict
    main_blocks: dict
    orphan_blocks: dict
    chain_length: int
    total_fees: float

    @property
    def total_revenue(self) -> float:
        return sum(self.revenue.values())


class RewardLedger:
    """Credits block rewards and fees to miners of main-chain blocks.

    Orphaned blocks credit nothing. The default 25 BTC reward and the
    per-transaction fee calibration make a full block worth about
    25.25 BTC, the level the simulator's scenarios are tuned to.
    """

    def __init__(self, block_reward: float = DEFAULT_BLOCK_REWARD):
        self.block_reward = block_reward
        self.balances: dict[str, float] = {}

    def credit(self, miner_id: str, amount: float):
        self.balances[miner_id] = self.balances.get(miner_id, 0.0) + amount


def settle_rewards(view: ChainView, ledger: RewardLedger) -> SettlementReport:
    """Walk the main chain from the best tip, credit each block's miner,
    and count each miner's orphaned blocks."""
    main = view.main_chain()
    revenue: dict[str, float] = {}
    main_blocks: dict[str, int] = {}
    total_fees = 0.0
    for blk in main[1:]:  # skip genesis
        amount = ledger.block_reward + blk.fees
        ledger.credit(blk.miner_id, amount)
        revenue[blk.miner_id] = revenue.get(blk.miner_id, 0.0) + amount
        main_blocks[blk.miner_id] = main_blocks.get(blk.miner_id, 0) + 1
        total_fees += blk.fees

    on_main = {b.block_id for b in main}
    orphans: dict[str, int] = {}
    for bid, blk in view.blocks.items():
        if bid not in on_main:
            orphans[blk.miner_id] = orphans.get(blk.miner_id, 0) + 1
    return SettlementReport(revenue, main_blocks, orphans,
                            len(main) - 1, total_fees)
