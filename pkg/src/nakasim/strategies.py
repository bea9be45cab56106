"""Miner and attacker behaviours.

Each strategy is a deterministic state machine driven by the engine's
events: block headers, validated blocks, its own finds, transactions,
and timers. A strategy only ever references blocks and transactions its
node has actually seen (plus blocks it mined itself).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .analytics import feather_fork_orphan_probability
from .chain import GENESIS_ID, SimBlock, SimTransaction, TemplatePolicy
from .mining import ValidationError

FULL = TemplatePolicy("full")
EMPTY = TemplatePolicy("empty")


class Strategy:
    """Base: mine the fullest template on the best validated tip and
    publish immediately.

    ``refresh_delay_s`` models the time a pool needs to rebuild a full
    work template after an externally mined tip change (mempool
    reconciliation and job distribution); during that window it hands
    out coinbase-only work. A miner's own blocks never pay the delay,
    its next template is staged in advance.
    """

    kind = "honest"
    use_headers = False

    def __init__(self, sim, node, params=None):
        self.sim = sim
        self.node = node
        self.params = params or {}
        self.refresh_delay = float(self.params.get("refresh_delay_s", 0.0))
        self._target = GENESIS_ID
        self._target_h = 0
        self._policy = self._full_policy()
        self._cur = self._policy
        self._timer_gen = -1

    def _full_policy(self) -> TemplatePolicy:
        rational = self.params.get("rational_response")
        blacklist = frozenset(self.params.get("blacklist", ()))
        if rational:
            p_orph = feather_fork_orphan_probability(
                rational["attacker_share"],
                int(rational.get("give_up_depth", 1)))
            expected_loss = p_orph * (self.sim.block_reward + 0.25)
            gain = float(rational.get("censored_fee",
                                      self.sim.mempool_tx_fee))
            if gain < expected_loss:
                return TemplatePolicy("censoring", blacklist)
        if self.params.get("censor"):
            return TemplatePolicy("censoring", blacklist)
        return FULL

    # -- engine interface ------------------------------------------------

    def start(self):
        pass

    def mining_target(self):
        return self._target, self._cur

    def on_header(self, block: SimBlock, t: float):
        pass

    def on_block_connected(self, block: SimBlock, report, t: float):
        if not report.changed:
            return
        view = self.node.view
        own = view.blocks[view.best_tip].miner_id == self.node.node_id
        self._retarget(view.best_tip, view.best_height, own, t)

    def _retarget(self, parent_id: int, height: int, own: bool, t: float):
        self._target = parent_id
        self._target_h = height
        if own or self.refresh_delay <= 0:
            self._cur = self._policy
        else:
            self._cur = EMPTY
            self._timer_gen = self.sim.schedule_timer(
                self.node, self.refresh_delay, "template")

    def on_timer(self, tag, gen, t: float):
        if tag == "template" and gen == self._timer_gen:
            self._cur = self._policy

    def on_found(self, block: SimBlock, t: float) -> bool:
        return True

    def force_txs(self) -> tuple:
        return ()

    def on_tx(self, tx: SimTransaction, t: float):
        pass

    def on_merchant_accept(self, tx_id: str, t: float):
        pass

    def finalize(self, t: float):
        pass


class EmptyBlockStrategy(Strategy):
    """Header (SPV) mining: on a new best header, immediately mine a
    coinbase-only block on top of it; switch to a full template only
    once the body has been downloaded and validated and the work update
    has gone out."""

    kind = "empty_block"
    use_headers = True

    def on_header(self, block: SimBlock, t: float):
        if block.height > self._target_h:
            self._target = block.block_id
            self._target_h = block.height
            self._cur = EMPTY
            self._timer_gen = -1  # cancel any pending full-template switch

    def on_block_connected(self, block: SimBlock, report, t: float):
        if not report.changed:
            # the validated chain did not move; but our header target may
            # just have become buildable
            if block.block_id == self._target and self._cur is EMPTY:
                self._schedule_full(block, t)
            return
        view = self.node.view
        best_h = view.best_height
        if best_h >= self._target_h:
            own = view.blocks[view.best_tip].miner_id == self.node.node_id
            self._retarget(view.best_tip, best_h, own, t)
        elif block.block_id == self._target:
            self._schedule_full(block, t)

    def _schedule_full(self, block: SimBlock, t: float):
        if block.miner_id == self.node.node_id or self.refresh_delay <= 0:
            self._cur = self._policy
        else:
            self._timer_gen = self.sim.schedule_timer(
                self.node, self.refresh_delay, "template")


@dataclass
class PrivateChainState:
    """A withheld fork: the hidden blocks, where it branches from the
    public chain, and the current lead over the public tip."""

    hidden: deque
    branch_point: int
    public_height: int

    @property
    def tip_height(self) -> int:
        return self.hidden[-1].height if self.hidden else -1

    @property
    def lead(self) -> int:
        if not self.hidden:
            return 0
        return self.tip_height - self.public_height


class SelfishStrategy(Strategy):
    """Keep found blocks secret; reveal just enough to stay ahead when
    the public chain advances, race from a one-block lead, and abandon
    when behind. Tie races resolve through real propagation, so the
    fraction of honest power that lands on the attacker's branch is a
    property of the topology rather than an assumed parameter."""

    kind = "selfish"
    use_headers = True

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self.state = PrivateChainState(deque(), GENESIS_ID, 0)
        self._racing = False

    def mining_target(self):
        if self.state.hidden:
            return self.state.hidden[-1].block_id, EMPTY
        return self._target, self._cur

    def on_header(self, block: SimBlock, t: float):
        if block.miner_id == self.node.node_id:
            return
        st = self.state
        if block.height <= st.public_height:
            return
        st.public_height = block.height
        if not st.hidden:
            if block.height > self._target_h:
                self._target = block.block_id
                self._target_h = block.height
                self._racing = False
            return
        tip_h = st.tip_height
        if tip_h > block.height:
            # reveal up to the public height; a two-block lead collapses
            # to publishing everything and winning outright
            if tip_h - block.height == 1:
                self._publish_hidden(t, upto=None)
            else:
                self._publish_hidden(t, upto=block.height)
        elif tip_h == block.height:
            self._publish_hidden(t, upto=None)
            self._racing = True
        else:
            st.hidden.clear()
            self._target = block.block_id
            self._target_h = block.height
            self._racing = False

    def _publish_hidden(self, t: float, upto):
        st = self.state
        while st.hidden and (upto is None or st.hidden[0].height <= upto):
            blk = st.hidden.popleft()
            self.sim.publish_block(self.node.node_id, blk, t)
            self._target = blk.block_id
            self._target_h = blk.height

    def on_found(self, block: SimBlock, t: float) -> bool:
        st = self.state
        if self._racing and not st.hidden:
            # race resolution in our favour: claim both blocks
            self._racing = False
            self._target = block.block_id
            self._target_h = block.height
            st.public_height = block.height
            return True
        st.hidden.append(block)
        if len(st.hidden) == 1:
            st.branch_point = block.parent_id
        return False

    def on_block_connected(self, block, report, t):
        pass  # targeting is driven by headers

    def finalize(self, t: float):
        self._publish_hidden(t, upto=None)


class CensorForkStrategy(Strategy):
    """Refuse to extend chains carrying blacklisted transactions.

    Punitive forking never gives up (or only past ``max_fork_depth``);
    feather forking abandons once the offending branch has pulled
    ``give_up_depth`` blocks further ahead than the initial one-block
    deficit. Both always exclude blacklisted transactions from their own
    templates.
    """

    kind = "punitive_fork"
    use_headers = False

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        # an empty blacklist (and no flagged-tx censoring) degenerates to
        # honest mining: nothing is ever dirty
        blacklist = frozenset(self.params.get("blacklist", ()))
        self.blacklist = blacklist
        self.censor_flagged = bool(self.params.get("censor_flagged", True))
        self._policy = TemplatePolicy("censoring", blacklist)
        self._cur = self._policy
        give_up = self.params.get("give_up_depth")
        if self.kind == "feather_fork":
            self.give_up = int(give_up if give_up is not None else 1)
        else:
            self.give_up = self.params.get("max_fork_depth")  # None: never
        self._dirty: dict[int, bool] = {GENESIS_ID: False}
        self._tolerated: set[int] = set()
        self._clean_tip = GENESIS_ID
        self._clean_h = 0

    def _block_dirty(self, block: SimBlock) -> bool:
        memo = self._dirty.get(block.block_id)
        if memo is not None:
            return memo
        dirty = self._dirty.get(block.parent_id, False)
        if not dirty and block.block_id not in self._tolerated:
            for tx in block.txs[1:]:
                if (self.censor_flagged and tx.censored) or \
                        (self.blacklist & tx.addresses()):
                    dirty = True
                    break
        self._dirty[block.block_id] = dirty
        return dirty

    def mining_target(self):
        return self._clean_tip, self._cur

    def on_block_connected(self, block: SimBlock, report, t: float):
        view = self.node.view
        for bid in report.connected:
            blk = view.blocks[bid]
            if not self._block_dirty(blk) and blk.height > self._clean_h:
                self._clean_tip = bid
                self._clean_h = blk.height
        deficit = view.best_height - self._clean_h
        if self.give_up is not None and deficit >= 1 + self.give_up:
            self._tolerate_chain(view)

    def _tolerate_chain(self, view):
        bid = view.best_tip
        while bid is not None and self._dirty.get(bid, True):
            self._tolerated.add(bid)
            self._dirty[bid] = False
            bid = view.blocks[bid].parent_id
        self._clean_tip = view.best_tip
        self._clean_h = view.best_height


class FeatherForkStrategy(CensorForkStrategy):
    kind = "feather_fork"


class GoldfingerStrategy(Strategy):
    """Sabotage mining: always coinbase-only blocks, no transaction
    throughput contributed at all. Combined with eclipse control actions
    this starves the honest majority; the metrics report the damage.

    ``orphan_depth`` switches on active orphaning: the attacker refuses
    to build on anyone else's blocks, abandoning a losing fork only once
    it falls that many blocks behind ("unbounded" never abandons, which
    with majority power erases honest blocks entirely).
    """

    kind = "goldfinger"

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self._policy = EMPTY
        self._cur = EMPTY
        self.orphan_depth = self.params.get("orphan_depth")
        self._own_tip = GENESIS_ID
        self._own_h = 0

    def mining_target(self):
        if self.orphan_depth is None:
            return self._target, EMPTY
        return self._own_tip, EMPTY

    def on_found(self, block, t):
        if self.orphan_depth is not None:
            self._own_tip = block.block_id
            self._own_h = block.height
        return True

    def on_block_connected(self, block, report, t):
        super().on_block_connected(block, report, t)
        if self.orphan_depth is None or self.orphan_depth == "unbounded":
            return
        deficit = self.node.view.best_height - self._own_h
        if deficit > int(self.orphan_depth):
            self._own_tip = self.node.view.best_tip
            self._own_h = self.node.view.best_height


class WithholdStrategy(Strategy):
    """Infiltrate a victim pool: earn shares with partial proofs-of-work
    while suppressing full blocks. The fork-after-withholding variant
    keeps the newest found block and submits it through the pool manager
    the moment an outside block is announced, manufacturing a fork."""

    kind = "withhold_bwh"
    use_headers = True

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self.faw = self.kind == "withhold_faw"
        pool_id = node.miner.spec.pool_id
        if pool_id is None:
            raise ValidationError("withholding requires pool membership")
        pool = next(p for p in sim.pools if p.pool_id == pool_id)
        self.pool_members = set(pool.members)
        self.manager_node = self.params.get("manager_node",
                                            sorted(pool.members)[0])
        total = self.params.get("attacker_total_hash")
        if total is not None and node.miner.spec.hash_share > total + 1e-12:
            raise ValidationError(
                "infiltration exceeds the attacker's total hash power")
        self._held = None
        self.discarded = 0

    def on_found(self, block: SimBlock, t: float) -> bool:
        if self.faw:
            if self._held is not None:
                self.discarded += 1
            self._held = block
        else:
            self.discarded += 1
        return False

    def on_header(self, block: SimBlock, t: float):
        if not self.faw or self._held is None:
            return
        if block.miner_id in self.pool_members:
            return
        if block.height == self._held.height:
            held, self._held = self._held, None
            self.node.miner.share_record.full_blocks_submitted += 1
            self.sim.publish_block(self.manager_node, held, t)

    def on_block_connected(self, block, report, t):
        super().on_block_connected(block, report, t)
        if self._held is not None and \
                self.node.view.best_tip != self._held.parent_id:
            self._held = None
            self.discarded += 1


class FAWStrategy(WithholdStrategy):
    kind = "withhold_faw"


class DoubleSpendStrategy(Strategy):
    """Shared machinery for the double-spend variants: inject a payment
    T1 and a conflicting respend T2, run episodes, and leave success
    evaluation to settlement (accepted by the merchant and T2 on the
    final main chain)."""

    kind = "double_spend_race"
    use_headers = True

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self.episodes = int(self.params.get("episodes", 100))
        self.give_up_deficit = int(self.params.get("give_up_deficit", 8))
        self.episode_gap = float(self.params.get("episode_gap_s", 1.0))
        self.merchant = self._find_merchant()
        self._check_merchant()
        self.records: list[dict] = []
        self._ep = -1
        self._t1 = None
        self._t2 = None
        self._paid = False

    def _find_merchant(self):
        if not self.sim.merchants:
            raise ValidationError("double spend scenarios need a merchant")
        return self.sim.merchants[0]

    def _check_merchant(self):
        n = self.merchant.confirmations
        if self.kind == "double_spend_race":
            if n != 0:
                raise ValidationError(
                    "race variant expects a zero-confirmation merchant")
        elif n < 1:
            raise ValidationError(
                f"{self.kind} expects an n >= 1 confirmation merchant")

    def _make_pair(self, t: float):
        self._ep += 1
        me = self.node.node_id
        ref = (f"coin:{me}:{self._ep}", 0)
        value = float(self.params.get("value_btc", 1.0))
        fee = self.sim.mempool_tx_fee
        t1 = SimTransaction(
            tx_id=f"ds{self._ep}t1", inputs=(ref,),
            outputs=((f"addr:{self.merchant.node}", value),), fee=fee,
            origin_node=me, created_at=t)
        t2 = SimTransaction(
            tx_id=f"ds{self._ep}t2", inputs=(ref,),
            outputs=((f"addr:{me}", value),), fee=fee,
            origin_node=me, created_at=t)
        self._t1, self._t2 = t1, t2
        self._paid = False
        self.sim.watch_tx(self.merchant, t1.tx_id, self)
        return t1, t2

    def _record(self, t: float):
        self.records.append({
            "kind": self.kind, "episode": self._ep,
            "t1": self._t1.tx_id, "t2": self._t2.tx_id,
            "accepted_at": self._accepted_at(),
        })
        self.sim.attack_log.append(self.records[-1])
        if self._ep + 1 >= self.episodes:
            self.sim.request_stop()

    def _accepted_at(self):
        return self.merchant.accepted.get(self._t1.tx_id)

    def on_merchant_accept(self, tx_id: str, t: float):
        if self._t1 is not None and tx_id == self._t1.tx_id:
            self._paid = True

    def finalize(self, t: float):
        # an episode still in flight at the horizon counts as an attempt
        if self._t1 is not None:
            self._record(t)
            self._t1 = None


class RaceAttackStrategy(DoubleSpendStrategy):
    """Zero-confirmation race: hand T1 straight to the merchant while
    flooding T2 from a miner-adjacent position, and mine on T2."""

    kind = "double_spend_race"

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self._resolve_block = None

    def start(self):
        self.sim.schedule_timer(self.node, self.episode_gap, "episode")

    def on_timer(self, tag, gen, t):
        super().on_timer(tag, gen, t)
        if tag == "episode":
            t1, t2 = self._make_pair(t)
            # T2 enters the network at the attacker, T1 at the merchant
            self.sim.inject_tx(t2, self.node.node_id, t)
            self.sim.inject_tx(t1, self.merchant.node, t)
            self._resolve_block = None

    def on_block_connected(self, block, report, t):
        super().on_block_connected(block, report, t)
        if self._t1 is None:
            return
        if self._resolve_block is None:
            for bid in report.connected:
                blk = self.node.view.blocks[bid]
                ids = {tx.tx_id for tx in blk.txs[1:]}
                if self._t1.tx_id in ids or self._t2.tx_id in ids:
                    self._resolve_block = bid
                    break
        if self._resolve_block is not None and \
                self.node.view.best_height >= \
                self.node.view.blocks[self._resolve_block].height + 1:
            self._record(t)
            self._t1 = None
            self.sim.schedule_timer(self.node, self.episode_gap, "episode")


class BruteForceStrategy(DoubleSpendStrategy):
    """Private-chain double spend: once T1 is buried in a public block,
    fork from its parent with T2, mine in secret, publish after the
    merchant pays and the hidden chain is strictly longer."""

    kind = "double_spend_brute"

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        self._phase = "idle"
        self._private: deque = deque()
        self._fork_point = GENESIS_ID
        self._public_h = 0
        self._accept_h = None  # public height at which the merchant pays
        self._t2_pending = False

    def start(self):
        self.sim.schedule_timer(self.node, self.episode_gap, "episode")

    def on_timer(self, tag, gen, t):
        super().on_timer(tag, gen, t)
        if tag == "episode":
            t1, _ = self._make_pair(t)
            self.sim.inject_tx(t1, self.node.node_id, t)
            self._phase = "await_inclusion"

    def mining_target(self):
        if self._phase == "race" and self._private:
            return self._private[-1].block_id, FULL
        if self._phase == "race":
            return self._fork_point, FULL
        return self._target, self._cur

    def force_txs(self):
        if self._phase == "race" and self._t2_pending:
            return (self._t2,)
        return ()

    def on_header(self, block, t):
        if block.miner_id != self.node.node_id and \
                block.height > self._public_h:
            self._public_h = block.height
            if self._phase == "race":
                self._maybe_resolve(t)

    def on_block_connected(self, block, report, t):
        super().on_block_connected(block, report, t)
        if self._phase == "await_inclusion" and self._t1 is not None:
            for bid in self.sim.tx_blocks.get(self._t1.tx_id, ()):
                if bid in self.node.view.blocks:
                    blk = self.node.view.blocks[bid]
                    self._fork_point = blk.parent_id
                    self._public_h = max(self._public_h, blk.height)
                    self._accept_h = blk.height + \
                        self.merchant.confirmations - 1
                    self._private.clear()
                    self._t2_pending = True
                    self._phase = "race"
                    break
        if self._phase == "race":
            self._public_h = max(self._public_h,
                                 self.node.view.best_height)
            self._maybe_resolve(t)

    def on_found(self, block, t):
        if self._phase != "race":
            return True
        self._private.append(block)
        self._t2_pending = False
        self._maybe_resolve(t)
        return False

    def _tip_h(self):
        return self._private[-1].height if self._private \
            else self.sim.blocks[self._fork_point].height

    def _merchant_paid(self) -> bool:
        # inferred from our own sight of the public chain: the attacker
        # knows the merchant's confirmation policy and watches the chain
        return self._accept_h is not None and \
            self._public_h >= self._accept_h

    def _maybe_resolve(self, t):
        if self._phase != "race" or not self._merchant_paid():
            return
        if self._tip_h() > self._public_h:
            # leave the race state first: publishing our own blocks
            # re-enters the connected-block hook
            self._phase = "publishing"
            while self._private:
                blk = self._private.popleft()
                self.sim.publish_block(self.node.node_id, blk, t)
            self._finish(t)
        elif self._public_h - self._tip_h() >= self.give_up_deficit:
            self._private.clear()
            self._finish(t)

    def _finish(self, t):
        self._phase = "idle"
        self._record(t)
        self._t1 = None
        if self._ep + 1 < self.episodes:
            self.sim.schedule_timer(self.node, self.episode_gap, "episode")


class FinneyStrategy(BruteForceStrategy):
    """Pre-mine a secret block containing T2, then release T1 publicly;
    after the merchant's confirmations arrive, race the secret branch
    against the public chain."""

    kind = "double_spend_finney"

    def on_timer(self, tag, gen, t):
        Strategy.on_timer(self, tag, gen, t)
        if tag == "episode":
            self._make_pair(t)
            self._phase = "premine"
            self._private.clear()
            self._t2_pending = True
            self._accept_h = None
            self._fork_point = self.node.view.best_tip
            self._public_h = self.node.view.best_height

    def mining_target(self):
        if self._phase == "premine":
            return self._fork_point, FULL
        return super().mining_target()

    def force_txs(self):
        if self._phase in ("premine", "race") and self._t2_pending:
            return (self._t2,)
        return ()

    def on_found(self, block, t):
        if self._phase == "premine":
            self._private.append(block)
            self._t2_pending = False
            self._phase = "race"
            self.sim.inject_tx(self._t1, self.node.node_id, t)
            return False
        return super().on_found(block, t)

    def on_block_connected(self, block, report, t):
        Strategy.on_block_connected(self, block, report, t)
        if self._phase == "premine":
            # restart the pre-mine on the new tip
            if report.changed:
                self._fork_point = self.node.view.best_tip
                self._public_h = self.node.view.best_height
            return
        if self._phase == "race":
            if self._accept_h is None and self._t1 is not None:
                for bid in self.sim.tx_blocks.get(self._t1.tx_id, ()):
                    if bid in self.node.view.blocks:
                        self._accept_h = self.node.view.blocks[bid].height \
                            + self.merchant.confirmations - 1
                        break
            self._public_h = max(self._public_h,
                                 self.node.view.best_height)
            self._maybe_resolve(t)


class BalanceAttackStrategy(Strategy):
    """Partition two mining groups, feed each side one of a conflicting
    transaction pair, then swing the attacker's hash power behind the
    respend side so it comes out ahead when the partition heals."""

    kind = "balance_attack"

    def __init__(self, sim, node, params=None):
        super().__init__(sim, node, params)
        p = self.params
        self.group_a = list(p["group_a"])
        self.group_b = list(p["group_b"])
        self.shift_time = float(p["shift_time"])
        if not any(a.kind == "partition" for a in sim.control):
            raise ValidationError(
                "balance attack requires a partition control action")
        part = next(a for a in sim.control if a.kind == "partition")
        self.partition_at = part.at
        if not self.sim.merchants:
            raise ValidationError("balance attack needs a merchant")
        self.merchant = self.sim.merchants[0]
        self._groups = {}
        for nid in self.group_a:
            self._groups[nid] = "a"
        for nid in self.group_b:
            self._groups[nid] = "b"
        self._gtip = {"a": (GENESIS_ID, 0), "b": (GENESIS_ID, 0)}
        self._t1 = None
        self._t2 = None
        self._launched = False

    def start(self):
        self.sim.schedule_timer(
            self.node, self.partition_at + 1e-6, "launch")

    def on_timer(self, tag, gen, t):
        super().on_timer(tag, gen, t)
        if tag == "launch" and not self._launched:
            self._launched = True
            me = self.node.node_id
            ref = (f"coin:{me}:balance", 0)
            value = float(self.params.get("value_btc", 1.0))
            self._t1 = SimTransaction(
                tx_id="balt1", inputs=(ref,),
                outputs=((f"addr:{self.merchant.node}", value),),
                fee=self.sim.mempool_tx_fee, origin_node=me, created_at=t)
            self._t2 = SimTransaction(
                tx_id="balt2", inputs=(ref,),
                outputs=((f"addr:{me}", value),),
                fee=self.sim.mempool_tx_fee, origin_node=me, created_at=t)
            self.sim.watch_tx(self.merchant, "balt1")
            self.sim.inject_tx(self._t1, self.group_a[0], t)
            self.sim.inject_tx(self._t2, self.group_b[0], t)
            self.sim.attack_log.append(
                {"kind": self.kind, "t1": "balt1", "t2": "balt2"})

    def _side(self, t) -> str:
        return "a" if t < self.shift_time else "b"

    def mining_target(self):
        tip, _ = self._gtip[self._side(self.sim.queue.now)]
        return tip, FULL

    def on_block_connected(self, block, report, t):
        for bid in report.connected:
            blk = self.node.view.blocks[bid]
            grp = self._groups.get(blk.miner_id)
            if grp is None and blk.miner_id == self.node.node_id:
                grp = self._side(blk.found_at)
            if grp is None:
                continue
            if blk.height > self._gtip[grp][1]:
                self._gtip[grp] = (bid, blk.height)

    def on_found(self, block, t):
        side = self._side(t)
        group = self.group_a if side == "a" else self.group_b
        self._gtip[side] = (block.block_id, block.height)
        self.sim.publish_block(self.node.node_id, block, t,
                               restrict_to=set(group) | {self.node.node_id})
        return False  # already routed selectively


STRATEGIES = {
    "honest": Strategy,
    "empty_block": EmptyBlockStrategy,
    "selfish": SelfishStrategy,
    "punitive_fork": CensorForkStrategy,
    "feather_fork": FeatherForkStrategy,
    "goldfinger": GoldfingerStrategy,
    "withhold_bwh": WithholdStrategy,
    "withhold_faw": FAWStrategy,
    "double_spend_race": RaceAttackStrategy,
    "double_spend_finney": FinneyStrategy,
    "double_spend_brute": BruteForceStrategy,
    "balance_attack": BalanceAttackStrategy,
}


def make_strategy(kind: str, sim, node, params=None) -> Strategy:
    cls = STRATEGIES.get(kind)
    if cls is None:
        raise ValidationError(f"unknown strategy kind {kind!r}")
    return cls(sim, node, params)
