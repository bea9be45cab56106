"""Discrete-event simulation core.

One Simulation couples the mining race, the peer network, and the
per-miner strategies. Everything is driven by a single event queue and
is a pure function of (scenario, seed).

Propagation is realized as a first-arrival schedule: when a payload is
published, the delivery time at every reachable node is the shortest
path through the current topology under the forward-once rule (every
node relays a new payload to its peers exactly once, immediately for
headers and compact sketches, after validation for full bodies). The
flood and the shortest-path schedule coincide, so the engine computes
the schedule once per (origin, size, mode) and reuses it; only arrivals
that carry a state change become events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import chain as chain_mod
from .chain import (ChainView, SimBlock, SimTransaction, TemplatePolicy,
                    coinbase_tx, genesis_block, GENESIS_ID,
                    BLOCK_HEADER_BYTES, COINBASE_BYTES)
from .mining import (FindStream, MinerSpec, PoolSpec, ShareRecord,
                     ValidationError, miner_rng, sample_ppows)
from .network import (CROSS_PROFILE, EventQueue, LinkProfile, Topology,
                      HEADER_MSG_BYTES, TX_MSG_BYTES, COMPACT_BLOCK_BYTES)

# event kinds
EV_FIND = 0
EV_VALIDATED = 1
EV_HEADER = 2
EV_TX = 3
EV_TIMER = 4
EV_CONTROL = 5
EV_INJECT = 6

EMPTY_CLASS_BYTES = 2_000
FULL_CLASS_BYTES = 900_000


def size_class(size_bytes: int) -> str:
    if size_bytes <= EMPTY_CLASS_BYTES:
        return "empty"
    if size_bytes >= FULL_CLASS_BYTES:
        return "full"
    return "mid"


@dataclass
class ControlAction:
    """A timed change to the network: partition/heal, eclipse/release,
    or installing/removing a payload filter on edges."""

    kind: str
    at: float
    params: dict = field(default_factory=dict)


@dataclass
class MerchantModel:
    """An n-confirmation acceptance policy at one node. With n = 0 a
    watched transaction is accepted the moment it is first heard."""

    node: str
    confirmations: int
    acceptance_log: list = field(default_factory=list)
    accepted: dict = field(default_factory=dict)  # tx_id -> accepted_at

    def accept(self, tx_id: str, t: float):
        self.accepted[tx_id] = t
        self.acceptance_log.append((tx_id, t, None))


class Node:
    """Runtime state of one peer."""

    __slots__ = ("node_id", "idx", "region", "view", "header_seen",
                 "mempool", "claimed_inputs", "strategy", "miner")

    def __init__(self, node_id: str, idx: int, region: str):
        self.node_id = node_id
        self.idx = idx
        self.region = region
        self.view = ChainView()
        self.header_seen: dict[int, float] = {GENESIS_ID: 0.0}
        self.mempool: dict[str, SimTransaction] = {}
        self.claimed_inputs: dict = {}
        self.strategy = None
        self.miner: Optional[MinerRuntime] = None

    def accept_tx(self, tx: SimTransaction) -> bool:
        """First-seen mempool policy: a transaction that respends an
        input already claimed by another known transaction is dropped."""
        if tx.tx_id in self.mempool:
            return False
        for ref in tx.inputs:
            if self.claimed_inputs.get(ref, tx.tx_id) != tx.tx_id:
                return False
        self.mempool[tx.tx_id] = tx
        for ref in tx.inputs:
            self.claimed_inputs[ref] = tx.tx_id
        return True


class MinerRuntime:
    __slots__ = ("spec", "node", "stream", "rng", "found", "published",
                 "share_record")

    def __init__(self, spec: MinerSpec, node: Node, rng, mean_interval):
        self.spec = spec
        self.node = node
        self.rng = rng
        self.stream = FindStream(spec.hash_share, mean_interval, rng)
        self.found = 0
        self.published = 0
        self.share_record = (ShareRecord(spec.miner_id, spec.pool_id)
                             if spec.pool_id else None)


class Simulation:
    """One deterministic run."""

    def __init__(self, topology: Topology, miners: list[MinerSpec],
                 seed: int,
                 pools: list[PoolSpec] = (),
                 mean_interval: float = 600.0,
                 block_reward: float = chain_mod.DEFAULT_BLOCK_REWARD,
                 mempool_rate_tps: float = 0.0,
                 mempool_tx_bytes: int = chain_mod.DEFAULT_TX_BYTES,
                 mempool_tx_fee: float = chain_mod.DEFAULT_TX_FEE,
                 relay_mode: str = "full",
                 relay_switch_at: Optional[float] = None,
                 relay_switch_to: str = "compact",
                 validation_s_per_mb: float = 0.2,
                 compact_bytes: int = COMPACT_BLOCK_BYTES,
                 ppows_per_block: int = 100,
                 horizon_blocks: Optional[int] = None,
                 horizon_seconds: Optional[float] = None,
                 control: list = (),
                 merchants: list = (),
                 observers: list = ()):
        if horizon_blocks is None and horizon_seconds is None:
            raise ValidationError("a horizon (blocks or seconds) is required")
        self.topology = topology
        self.seed = seed
        self.mean_interval = mean_interval
        self.block_reward = block_reward
        self.mempool_rate = mempool_rate_tps
        self.mempool_tx_bytes = mempool_tx_bytes
        self.mempool_tx_fee = mempool_tx_fee
        self.relay_mode_initial = relay_mode
        self.relay_switch_at = relay_switch_at
        self.relay_switch_to = relay_switch_to
        self.val_per_byte = validation_s_per_mb / 1_000_000.0
        self.compact_bytes = compact_bytes
        self.ppows_per_block = ppows_per_block
        self.horizon_blocks = horizon_blocks
        self.horizon_seconds = horizon_seconds

        # nodes
        self.nodes: list[Node] = []
        self.node_by_id: dict[str, Node] = {}
        for idx, nid in enumerate(topology.nodes):
            node = Node(nid, idx, topology.regions[nid])
            self.nodes.append(node)
            self.node_by_id[nid] = node

        # miners (one per node at most)
        self.miners: list[MinerRuntime] = []
        self.miner_by_id: dict[str, MinerRuntime] = {}
        for spec in miners:
            if spec.miner_id not in self.node_by_id:
                raise ValidationError(
                    f"miner {spec.miner_id} has no topology node")
            node = self.node_by_id[spec.miner_id]
            mr = MinerRuntime(spec, node,
                              miner_rng(seed, spec.miner_id), mean_interval)
            node.miner = mr
            self.miners.append(mr)
            self.miner_by_id[spec.miner_id] = mr
        self.pools = list(pools)

        # global block store and the published-block archive (the
        # eventual-consensus view used for settlement)
        g = genesis_block()
        self.blocks: dict[int, SimBlock] = {g.block_id: g}
        self.archive = ChainView()
        self._next_block_id = 1
        self.cum_bulk: dict[int, int] = {GENESIS_ID: 0}
        self.chain_txs: dict[int, frozenset] = {GENESIS_ID: frozenset()}
        self.chain_inputs: dict[int, frozenset] = {GENESIS_ID: frozenset()}
        self.published: set[int] = set()
        self.tx_blocks: dict[str, list] = {}
        self.input_blocks: dict = {}
        self.block_origin: dict[int, str] = {}
        self.censored_log: list = []

        base = BLOCK_HEADER_BYTES + COINBASE_BYTES
        self.bulk_capacity = (chain_mod.MAX_BLOCK_BYTES - base) \
            // mempool_tx_bytes

        self.queue = EventQueue()
        self.control = sorted(control, key=lambda a: a.at)
        self._validate_control()
        for i, action in enumerate(self.control):
            self.queue.push(action.at, (EV_CONTROL, i, None))

        # network dynamic state
        self.partition: Optional[tuple] = None   # (set, set, exempt)
        self.eclipses: dict[str, dict] = {}      # victim -> policy
        self.edge_filters: dict[tuple, dict] = {}
        self._net_rev = 0
        self._adj_cache = None
        self._sched_cache: dict = {}

        self.merchants: list[MerchantModel] = list(merchants)
        self._watch: dict[str, list] = {}   # tx_id -> [(merchant, strategy)]
        self.observers = {nid: {} for nid in observers}

        # metrics accumulators
        self.prop_acc: dict[tuple, list] = {}
        self.body_bytes: dict[str, list] = {}    # phase -> [bytes, count]
        self.attack_log: list[dict] = []
        self.censored_issued = 0
        self._timer_gen = 0
        self._stopped = False
        self.injections_pending: list = []

    # ------------------------------------------------------------------
    # validation of control actions
    # ------------------------------------------------------------------

    def _validate_control(self):
        partitions_open = 0
        for action in self.control:
            p = action.params
            if action.kind == "partition":
                partitions_open += 1
                if partitions_open > 1:
                    raise ValidationError(
                        "overlapping partitions are not supported")
                for group in (p["group_a"], p["group_b"]):
                    for nid in group:
                        if nid not in self.node_by_id:
                            raise ValidationError(
                                f"partition references unknown node {nid}")
            elif action.kind == "heal":
                partitions_open -= 1
            elif action.kind in ("eclipse", "release"):
                for key in ("victim", "controller"):
                    if key in p and p[key] not in self.node_by_id:
                        raise ValidationError(
                            f"{action.kind} references unknown node {p[key]}")
            elif action.kind in ("censor_link", "uncensor_link"):
                pass
            else:
                raise ValidationError(
                    f"unknown control action kind {action.kind!r}")

    # ------------------------------------------------------------------
    # relay mode and adjacency
    # ------------------------------------------------------------------

    def relay_mode(self, t: float) -> str:
        if self.relay_switch_at is not None and t >= self.relay_switch_at:
            return self.relay_switch_to
        return self.relay_mode_initial

    def _bump_net(self):
        self._net_rev += 1
        self._adj_cache = None
        self._sched_cache.clear()

    def _adjacency(self):
        """idx -> list of (peer_idx, latency, 1/goodput), honoring the
        active partition and eclipse rewiring."""
        if self._adj_cache is not None:
            return self._adj_cache
        from .network import goodput_derate
        adj = [[] for _ in self.nodes]
        part = self.partition

        def blocked(a: str, b: str) -> bool:
            if part is None:
                return False
            ga, gb, exempt = part
            if a in exempt or b in exempt:
                return False
            return (a in ga and b in gb) or (a in gb and b in ga)

        def add(a: str, b: str, prof: LinkProfile):
            ia, ib = self.node_by_id[a].idx, self.node_by_id[b].idx
            inv = 1.0 / (prof.bandwidth * goodput_derate(prof.loss))
            adj[ia].append((ib, prof.latency, inv, (a, b)))
            adj[ib].append((ia, prof.latency, inv, (a, b)))

        for (a, b), prof in sorted(self.topology.edges.items()):
            if a in self.eclipses or b in self.eclipses:
                continue
            if blocked(a, b):
                continue
            add(a, b, prof)
        for victim, policy in sorted(self.eclipses.items()):
            add(victim, policy["controller"], policy["profile"])
        self._adj_cache = adj
        return adj

    # ------------------------------------------------------------------
    # propagation schedules
    # ------------------------------------------------------------------

    def _dijkstra(self, origin_idx: int, size: float,
                  relay_after_validation: float = 0.0,
                  payload=None) -> list:
        """First-arrival times from origin. Returns [(idx, dt, pred_idx)]
        sorted by idx, origin excluded. ``relay_after_validation`` adds a
        per-relay-hop cost (full-block validation before forwarding)."""
        import heapq as hq
        adj = self._adjacency()
        n = len(self.nodes)
        dist = [math.inf] * n
        pred = [-1] * n
        dist[origin_idx] = 0.0
        heap = [(0.0, origin_idx)]
        ecl = self.eclipses
        while heap:
            d, u = hq.heappop(heap)
            if d > dist[u]:
                continue
            u_node = self.nodes[u]
            # forwarding predicates: an eclipse controller relays its
            # victim's payloads (and payloads toward the victim) only as
            # its policy allows
            dep = d + (relay_after_validation if u != origin_idx else 0.0)
            for v, lat, inv, edge_key in adj[u]:
                if payload is not None and self._edge_censored(edge_key,
                                                               payload):
                    continue
                if not self._forwarding_allowed(u, v, origin_idx):
                    continue
                nd = dep + lat + size * inv
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    hq.heappush(heap, (nd, v))
        out = []
        for i in range(n):
            if i != origin_idx and dist[i] < math.inf:
                out.append((i, dist[i], pred[i]))
        return out

    def _forwarding_allowed(self, u: int, v: int, origin_idx: int) -> bool:
        ecl = self.eclipses
        part = self.partition
        if not ecl and part is None:
            return True
        u_id = self.nodes[u].node_id
        v_id = self.nodes[v].node_id
        origin_id = self.nodes[origin_idx].node_id
        for victim, policy in ecl.items():
            ctrl = policy["controller"]
            if u_id == ctrl and origin_id == victim and v_id != victim:
                if not policy.get("forward_out", False):
                    return False
            if v_id == victim and not policy.get("forward_in", True):
                if origin_id != victim:
                    return False
        if part is not None and u_id in part[2]:
            # a partition-exempt node must not bridge the two groups
            ga, gb, _ = part
            og = "a" if origin_id in ga else "b" if origin_id in gb else None
            vg = "a" if v_id in ga else "b" if v_id in gb else None
            if og is not None and vg is not None and og != vg:
                return False
        return True

    def _edge_censored(self, edge_key: tuple, payload) -> bool:
        filt = self.edge_filters.get(edge_key)
        if not filt:
            return False
        if isinstance(payload, SimTransaction):
            if filt.get("censored_flag") and payload.censored:
                return True
            addrs = filt.get("addresses")
            if addrs and (set(addrs) & payload.addresses()):
                return True
            return False
        # block payloads: only an explicit block filter drops bodies
        return bool(filt.get("blocks"))

    def block_schedule(self, origin: str, size_bytes: int, mode: str) -> list:
        """Delivery schedule for one block body: [(node_idx, body_dt,
        validated_dt)]. Full bodies are validated before being relayed;
        compact sketches are relayed on arrival and validated locally."""
        key = ("blk", self._net_rev, origin, size_bytes, mode)
        hit = self._sched_cache.get(key)
        if hit is not None:
            return hit
        origin_idx = self.node_by_id[origin].idx
        val = size_bytes * self.val_per_byte
        if mode == "full":
            res = self._dijkstra(origin_idx, size_bytes,
                                 relay_after_validation=val)
        else:
            res = self._dijkstra(origin_idx, self.compact_bytes)
        out = [(i, dt, dt + val) for i, dt, _ in res]
        self._sched_cache[key] = out
        return out

    def header_schedule(self, origin: str) -> list:
        key = ("hdr", self._net_rev, origin)
        hit = self._sched_cache.get(key)
        if hit is not None:
            return hit
        origin_idx = self.node_by_id[origin].idx
        out = [(i, dt) for i, dt, _ in
               self._dijkstra(origin_idx, HEADER_MSG_BYTES)]
        self._sched_cache[key] = out
        return out

    def tx_schedule(self, origin: str, tx: SimTransaction) -> list:
        origin_idx = self.node_by_id[origin].idx
        return self._dijkstra(origin_idx, TX_MSG_BYTES, payload=tx)

    def relay_block(self, sender: str, receiver: str, block: SimBlock,
                    mode: str, t: Optional[float] = None):
        """Single-edge relay primitive: schedule the header announcement
        and body arrival of ``block`` from sender to receiver, returning
        (header_time, body_time). The body is None when the edge censors
        block payloads (dropped silently, visible only in metrics)."""
        from .network import transfer_time
        if t is None:
            t = self.queue.now
        profile = self.topology.profile(sender, receiver)
        if profile is None:
            raise ValidationError(f"no edge between {sender} and {receiver}")
        hdr_t = t + transfer_time(profile, HEADER_MSG_BYTES)
        idx = self.node_by_id[receiver].idx
        node = self.nodes[idx]
        if node.strategy is not None and node.strategy.use_headers:
            self.queue.push(hdr_t, (EV_HEADER, idx, block))
        key = tuple(sorted((sender, receiver)))
        filt = self.edge_filters.get(key)
        if filt and filt.get("blocks"):
            return hdr_t, None
        payload = block.size_bytes if mode == "full" else self.compact_bytes
        body_t = hdr_t + transfer_time(profile, payload)
        valid_t = body_t + block.size_bytes * self.val_per_byte
        self.queue.push(valid_t, (EV_VALIDATED, idx, block))
        return hdr_t, body_t

    # ------------------------------------------------------------------
    # actions available to strategies
    # ------------------------------------------------------------------

    def new_block_id(self) -> int:
        bid = self._next_block_id
        self._next_block_id += 1
        return bid

    def materialize_block(self, miner: MinerRuntime, parent_id: int,
                          policy: TemplatePolicy, t: float,
                          force_txs=()) -> SimBlock:
        """Create the block a miner finds at time t on the given parent
        under its template policy (see the chain module for packing).
        ``force_txs`` are included ahead of the mempool regardless of the
        policy (an attacker's own secret respend, for instance)."""
        parent = self.blocks[parent_id]
        node = miner.node
        bid = self.new_block_id()

        on_chain = self.chain_txs[parent_id]
        spent = self.chain_inputs[parent_id]
        tracked: list[SimTransaction] = []
        size = BLOCK_HEADER_BYTES + COINBASE_BYTES
        for tx in force_txs:
            if tx.tx_id not in on_chain and \
                    not any(r in spent for r in tx.inputs):
                tracked.append(tx)
                size += tx.size_bytes
        if policy.kind != "empty" and node.mempool:
            forced = {tx.tx_id for tx in tracked}
            forced_refs = {r for tx in tracked for r in tx.inputs}
            cands = []
            prune = []
            settled = parent.height - 6
            for tx in node.mempool.values():
                if tx.tx_id in on_chain:
                    if any(self.blocks[b].height <= settled
                           for b in self.tx_blocks.get(tx.tx_id, ())):
                        prune.append(tx.tx_id)
                    continue
                if tx.tx_id in forced:
                    continue
                if any(r in spent or r in forced_refs for r in tx.inputs):
                    if any(self.blocks[b].height <= settled
                           for r in tx.inputs
                           for b in self.input_blocks.get(r, ())):
                        prune.append(tx.tx_id)
                    continue
                if policy.admits(tx):
                    cands.append(tx)
            for tx_id in prune:
                del node.mempool[tx_id]
            cands.sort(key=lambda tx: (-tx.fee, tx.tx_id))
            for tx in cands:
                if size + tx.size_bytes <= chain_mod.MAX_BLOCK_BYTES:
                    tracked.append(tx)
                    size += tx.size_bytes

        bulk = 0
        if policy.kind != "empty" and self.mempool_rate > 0:
            avail = int(self.mempool_rate * t) - self.cum_bulk[parent_id]
            room = (chain_mod.MAX_BLOCK_BYTES - size) // self.mempool_tx_bytes
            bulk = max(0, min(avail, room, self.bulk_capacity))
            size += bulk * self.mempool_tx_bytes

        fees = bulk * self.mempool_tx_fee + sum(tx.fee for tx in tracked)
        cb = coinbase_tx(bid, miner.spec.miner_id, self.block_reward + fees, t)
        block = SimBlock(block_id=bid, parent_id=parent_id,
                         height=parent.height + 1,
                         miner_id=miner.spec.miner_id,
                         txs=(cb, *tracked), size_bytes=size, found_at=t,
                         bulk_txs=bulk, fees=fees)
        self.blocks[bid] = block
        self.cum_bulk[bid] = self.cum_bulk[parent_id] + bulk
        if tracked:
            self.chain_txs[bid] = self.chain_txs[parent_id] | \
                {tx.tx_id for tx in tracked}
            self.chain_inputs[bid] = self.chain_inputs[parent_id] | \
                {r for tx in tracked for r in tx.inputs}
            for tx in tracked:
                self.tx_blocks.setdefault(tx.tx_id, []).append(bid)
                for r in tx.inputs:
                    self.input_blocks.setdefault(r, []).append(bid)
        else:
            self.chain_txs[bid] = self.chain_txs[parent_id]
            self.chain_inputs[bid] = self.chain_inputs[parent_id]
        return block

    def publish_block(self, origin: str, block: SimBlock, t: float,
                      restrict_to: Optional[set] = None):
        """Announce and relay a block from ``origin`` at time t.

        ``restrict_to`` limits delivery to a set of node ids (a
        partition-exempt attacker feeding one side only); recipients
        still relay among themselves after connectivity changes.
        """
        if block.block_id in self.published:
            return
        self.published.add(block.block_id)
        self.block_origin[block.block_id] = origin
        origin_node = self.node_by_id[origin]
        mr = self.miner_by_id.get(block.miner_id)
        if mr is not None:
            mr.published += 1
        self.archive.insert(block, t)
        self._check_horizon(t)

        # the origin itself has the block at publish time
        self._connect_block(origin_node, block, t)
        origin_node.header_seen.setdefault(block.block_id, t)

        if self._stopped:
            return
        ecl = self.eclipses.get(origin)
        if ecl is not None and not ecl.get("forward_out", False):
            return  # the controller swallows the victim's blocks
        mode = self.relay_mode(t)
        phase = mode
        cls = size_class(block.size_bytes)
        src_region = origin_node.region
        payload = block.size_bytes if mode == "full" else self.compact_bytes

        for idx, hdr_dt in self.header_schedule(origin):
            node = self.nodes[idx]
            if restrict_to is not None and node.node_id not in restrict_to:
                continue
            if node.strategy is not None and node.strategy.use_headers:
                self.queue.push(t + hdr_dt, (EV_HEADER, idx, block))

        bb = self.body_bytes.setdefault((phase, cls), [0.0, 0])
        for idx, body_dt, valid_dt in self.block_schedule(
                origin, block.size_bytes, mode):
            node = self.nodes[idx]
            if restrict_to is not None and node.node_id not in restrict_to:
                continue
            self.queue.push(t + valid_dt, (EV_VALIDATED, idx, block))
            acc = self.prop_acc.setdefault(
                (phase, cls, src_region, node.region), [0.0, 0])
            acc[0] += body_dt
            acc[1] += 1
            bb[0] += payload
            bb[1] += 1

    def inject_tx(self, tx: SimTransaction, origin: str, t: float):
        """Introduce a tracked transaction at ``origin`` and flood it."""
        if tx.censored:
            self.censored_issued += 1
            self.censored_log.append((tx.tx_id, t))
        node = self.node_by_id[origin]
        if node.accept_tx(tx):
            self._tx_seen_at(node, tx, t, pred=-1)
        for idx, dt, pred in self.tx_schedule(origin, tx):
            self.queue.push(t + dt, (EV_TX, idx, (tx, pred)))

    def schedule_timer(self, node: Node, delay: float, tag) -> int:
        self._timer_gen += 1
        gen = self._timer_gen
        self.queue.push(self.queue.now + delay,
                        (EV_TIMER, node.idx, (tag, gen)))
        return gen

    def watch_tx(self, merchant: MerchantModel, tx_id: str, strategy=None):
        self._watch.setdefault(tx_id, []).append((merchant, strategy))

    def request_stop(self):
        self._stopped = True

    # ------------------------------------------------------------------
    # event handlers
    # ------------------------------------------------------------------

    def _connect_block(self, node: Node, block: SimBlock, t: float):
        report = node.view.insert(block, t)
        if report is None or not report.connected:
            return
        if node.strategy is not None:
            node.strategy.on_block_connected(block, report, t)
        if self._watch:
            self._check_merchants(node, t)

    def _check_merchants(self, node: Node, t: float):
        for merchant in self.merchants:
            if merchant.node != node.node_id or merchant.confirmations == 0:
                continue
            view = node.view
            tip_h = view.best_height
            done = []
            for tx_id, watchers in self._watch.items():
                if not any(w[0] is merchant for w in watchers):
                    continue
                if tx_id in merchant.accepted:
                    done.append(tx_id)
                    continue
                for bid in self.tx_blocks.get(tx_id, ()):
                    if bid not in view.blocks:
                        continue
                    confs = tip_h - view.blocks[bid].height + 1
                    if confs >= merchant.confirmations and \
                            view.is_ancestor(bid, view.best_tip):
                        merchant.accept(tx_id, t)
                        done.append(tx_id)
                        for m, strat in watchers:
                            if m is merchant and strat is not None:
                                strat.on_merchant_accept(tx_id, t)
                        break
            for tx_id in done:
                self._watch.pop(tx_id, None)

    def _tx_seen_at(self, node: Node, tx: SimTransaction, t: float,
                    pred: int):
        if node.node_id in self.observers:
            log = self.observers[node.node_id]
            if tx.tx_id not in log:
                pred_id = self.nodes[pred].node_id if pred >= 0 else None
                log[tx.tx_id] = (t, pred_id)
        for merchant in self.merchants:
            if merchant.node == node.node_id and \
                    merchant.confirmations == 0 and \
                    tx.tx_id in self._watch:
                if tx.tx_id not in merchant.accepted:
                    merchant.accept(tx.tx_id, t)
                    watchers = self._watch.pop(tx.tx_id)
                    for m, strat in watchers:
                        if m is merchant and strat is not None:
                            strat.on_merchant_accept(tx.tx_id, t)
        if node.strategy is not None:
            node.strategy.on_tx(tx, t)

    def _apply_control(self, action: ControlAction, t: float):
        p = action.params
        if action.kind == "partition":
            self.partition = (frozenset(p["group_a"]),
                              frozenset(p["group_b"]),
                              frozenset(p.get("exempt", ())))
            self._bump_net()
        elif action.kind == "heal":
            self.partition = None
            self._bump_net()
            self._sync_missing_blocks(t)
        elif action.kind == "eclipse":
            profile = p.get("profile", CROSS_PROFILE)
            self.eclipses[p["victim"]] = {
                "controller": p["controller"],
                "forward_in": p.get("forward_in", True),
                "forward_out": p.get("forward_out", False),
                "profile": profile,
            }
            self._bump_net()
        elif action.kind == "release":
            self.eclipses.pop(p["victim"], None)
            self._bump_net()
            self._sync_missing_blocks(t)
        elif action.kind == "censor_link":
            edges = p.get("edges") or self.topology.boundary_edges()
            for e in edges:
                self.edge_filters[tuple(sorted(e))] = p["filter"]
            self._bump_net()
        elif action.kind == "uncensor_link":
            edges = p.get("edges") or list(self.edge_filters)
            for e in edges:
                self.edge_filters.pop(tuple(sorted(e)), None)
            self._bump_net()

    def _sync_missing_blocks(self, t: float):
        """After connectivity is restored, peers exchange inventories:
        every published block a node missed is re-relayed from its
        origin under the new topology."""
        mode = self.relay_mode(t)
        for bid in sorted(self.published):
            block = self.blocks[bid]
            origin = self.block_origin[bid]
            missing = [n for n in self.nodes
                       if bid not in n.view.blocks
                       and n.node_id != origin]
            if not missing:
                continue
            sched = {i: (bdt, vdt) for i, bdt, vdt in
                     self.block_schedule(origin, block.size_bytes, mode)}
            for node in missing:
                if node.idx in sched:
                    bdt, vdt = sched[node.idx]
                    self.queue.push(t + vdt, (EV_VALIDATED, node.idx, block))

    def _check_horizon(self, t: float):
        if self.horizon_blocks is not None and \
                self.archive.best_height >= self.horizon_blocks:
            self._stopped = True

    # ------------------------------------------------------------------
    # main loop
    # ------------------------------------------------------------------

    def run(self) -> "Simulation":
        for mr in self.miners:
            if mr.spec.hash_share > 0:
                self.queue.push(mr.stream.next(),
                                (EV_FIND, mr.spec.miner_id, None))
        for node in self.nodes:
            if node.strategy is not None:
                node.strategy.start()
        for spec in self.injections_pending:
            self.queue.push(spec[0], (EV_INJECT, None, spec))

        queue = self.queue
        while len(queue):
            if self.horizon_seconds is not None and \
                    queue.peek_time() > self.horizon_seconds:
                break
            t, ev = queue.pop()
            kind = ev[0]
            if kind == EV_FIND:
                mr = self.miner_by_id[ev[1]]
                self._on_find(mr, t)
                if not self._stopped:
                    queue.push(t + mr.stream.next(),
                               (EV_FIND, ev[1], None))
            elif kind == EV_VALIDATED:
                self._connect_block(self.nodes[ev[1]], ev[2], t)
            elif kind == EV_HEADER:
                node = self.nodes[ev[1]]
                block = ev[2]
                if block.block_id not in node.header_seen:
                    node.header_seen[block.block_id] = t
                    node.strategy.on_header(block, t)
            elif kind == EV_TX:
                node = self.nodes[ev[1]]
                tx, pred = ev[2]
                if node.accept_tx(tx):
                    self._tx_seen_at(node, tx, t, pred)
            elif kind == EV_TIMER:
                node = self.nodes[ev[1]]
                tag, gen = ev[2]
                if node.strategy is not None:
                    node.strategy.on_timer(tag, gen, t)
            elif kind == EV_CONTROL:
                self._apply_control(self.control[ev[1]], t)
            elif kind == EV_INJECT:
                spec = ev[2]
                self.inject_tx(spec[2], spec[1], t)
            if self._stopped:
                break
        self.end_time = self.queue.now
        for node in self.nodes:
            if node.strategy is not None:
                node.strategy.finalize(self.end_time)
        return self

    def _on_find(self, mr: MinerRuntime, t: float):
        strat = mr.node.strategy
        parent_id, policy = strat.mining_target()
        block = self.materialize_block(mr, parent_id, policy, t,
                                       force_txs=strat.force_txs())
        mr.found += 1
        if mr.share_record is not None:
            mr.share_record.full_blocks_found += 1
        publish = strat.on_found(block, t)
        if publish:
            if mr.share_record is not None:
                mr.share_record.full_blocks_submitted += 1
            self.publish_block(mr.node.node_id, block, t)

    # ------------------------------------------------------------------
    # settlement helpers (used by metrics)
    # ------------------------------------------------------------------

    def sample_all_ppows(self):
        """Poisson share counts over the whole run, drawn per member in
        sorted order from each miner's own substream."""
        for mr in sorted(self.miners, key=lambda m: m.spec.miner_id):
            if mr.share_record is not None:
                mr.share_record.ppow_count = sample_ppows(
                    mr.spec.hash_share, self.end_time, self.mean_interval,
                    self.ppows_per_block, mr.rng)
