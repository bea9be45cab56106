"""Deanonymization analytics: synthetic wallet worlds, multi-input
address clustering, and first-relay transaction origin inference.

The clustering side is pure ledger analysis. Origin inference consumes
first-hear logs recorded by observer nodes inside a network simulation
and corrects for known link latencies.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import SimTransaction
from .mining import ValidationError
from .network import Topology, TX_MSG_BYTES, goodput_derate


class UnionFind:
    """Disjoint sets over hashable keys, path compression + union by
    size."""

    def __init__(self):
        self.parent: dict = {}
        self.size: dict = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            self.size[x] = 1
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def clusters(self) -> list[frozenset]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return sorted((frozenset(g) for g in groups.values()),
                      key=lambda s: sorted(s)[0])


@dataclass
class WalletWorld:
    """Synthetic ground truth: users own disjoint address sets, and the
    generated spending history never co-spends across users, so the
    multi-input heuristic is sound on it by construction."""

    ownership: dict            # address -> user
    ledger: list               # list[SimTransaction]
    params: dict = field(default_factory=dict)

    @property
    def users(self) -> list:
        return sorted(set(self.ownership.values()))

    def addresses_of(self, user) -> list:
        return sorted(a for a, u in self.ownership.items() if u == user)


def generate_world(n_users: int, addrs_per_user: int, n_txs: int,
                   p_merge: float, rng: np.random.Generator) -> WalletWorld:
    """Build a wallet world and a spending history.

    Each transaction spends from one user: a single input normally, and
    with probability ``p_merge`` it merges two or more of that user's
    addresses into one spend (the behaviour the heuristic exploits).
    """
    if n_users < 1 or addrs_per_user < 1 or n_txs < 0:
        raise ValidationError("world parameters must be positive")
    if not 0 <= p_merge <= 1:
        raise ValidationError("p_merge must be in [0, 1]")
    ownership = {}
    for u in range(n_users):
        for a in range(addrs_per_user):
            ownership[f"u{u}a{a}"] = f"u{u}"
    ledger = []
    for i in range(n_txs):
        user = int(rng.integers(n_users))
        addrs = [f"u{user}a{a}" for a in range(addrs_per_user)]
        if addrs_per_user > 1 and rng.random() < p_merge:
            k = 2 + int(rng.integers(addrs_per_user - 1))
            picks = rng.choice(addrs_per_user, size=min(k, addrs_per_user),
                               replace=False)
            inputs = tuple((addrs[j], i) for j in sorted(picks))
        else:
            inputs = ((addrs[int(rng.integers(addrs_per_user))], i),)
        payee = int(rng.integers(n_users))
        out_addr = f"u{payee}a{int(rng.integers(addrs_per_user))}"
        change = (addrs[int(rng.integers(addrs_per_user))], 0.1)
        ledger.append(SimTransaction(
            tx_id=f"w{i}", inputs=inputs,
            outputs=((out_addr, 1.0), change),
            fee=0.0001, created_at=float(i)))
    return WalletWorld(ownership, ledger,
                       params={"n_users": n_users,
                               "addrs_per_user": addrs_per_user,
                               "n_txs": n_txs, "p_merge": p_merge})


def cluster_multi_input(ledger: list) -> list[frozenset]:
    """Union-find closure over addresses co-spent as inputs of the same
    transaction. Coinbase transactions are ignored. The result is a
    deterministic partition, independent of ledger order."""
    uf = UnionFind()
    for tx in ledger:
        if tx.is_coinbase:
            continue
        addrs = sorted({a for a, _ in tx.inputs})
        if not addrs:
            continue
        first = addrs[0]
        uf.find(first)
        for other in addrs[1:]:
            uf.union(first, other)
    return uf.clusters()


def clustering_quality(clusters: list, ownership: dict) -> dict:
    """Pairwise precision and recall of a clustering against the true
    address ownership (only addresses observed in clusters count toward
    recall's denominator alongside all true same-user pairs)."""
    observed = {a for c in clusters for a in c}
    true_pairs = 0
    by_user: dict = {}
    for addr, user in ownership.items():
        by_user.setdefault(user, []).append(addr)
    for addrs in by_user.values():
        n = len(addrs)
        true_pairs += n * (n - 1) // 2
    predicted_pairs = 0
    correct_pairs = 0
    for cluster in clusters:
        members = sorted(cluster)
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                predicted_pairs += 1
                if ownership.get(a) == ownership.get(b):
                    correct_pairs += 1
    precision = correct_pairs / predicted_pairs if predicted_pairs else 1.0
    recall = correct_pairs / true_pairs if true_pairs else 1.0
    return {"precision": precision, "recall": recall,
            "clusters": len(clusters), "observed_addresses": len(observed)}


def tx_distance_matrix(topology: Topology) -> dict:
    """All-pairs shortest transaction relay times (500 B payload)."""
    ids = topology.nodes
    adj: dict = {n: [] for n in ids}
    for (a, b), prof in topology.edges.items():
        w = prof.latency + TX_MSG_BYTES / (prof.bandwidth *
                                           goodput_derate(prof.loss))
        adj[a].append((b, w))
        adj[b].append((a, w))
    dist = {}
    for src in ids:
        d = {src: 0.0}
        heap = [(0.0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > d.get(u, math.inf):
                continue
            for v, w in adj[u]:
                nd = du + w
                if nd < d.get(v, math.inf):
                    d[v] = nd
                    heapq.heappush(heap, (nd, v))
        dist[src] = d
    return dist


def infer_origin(observations: dict, topology: Topology) -> dict:
    """Guess each transaction's origin node from observers' first-hear
    logs.

    ``observations`` maps observer node id -> {tx_id: (time, from_peer)}.
    For every candidate origin the implied emission time at each
    observer is first_hear - relay_distance(candidate, observer); the
    true origin makes those implied times agree, so the candidate with
    the smallest spread wins. With a single observer all candidates tie
    at zero spread and the guess falls back to the peer that delivered
    the transaction first.
    """
    if not observations:
        return {}
    dist = tx_distance_matrix(topology)
    candidates = topology.nodes
    tx_ids: set = set()
    for log in observations.values():
        tx_ids.update(log)
    guesses = {}
    for tx_id in sorted(tx_ids):
        hears = []
        for obs in sorted(observations):
            if tx_id in observations[obs]:
                t, pred = observations[obs][tx_id]
                hears.append((obs, t, pred))
        if not hears:
            continue
        best_nodes = []
        best_score = math.inf
        for cand in candidates:
            implied = [t - dist[cand].get(obs, math.inf)
                       for obs, t, _ in hears]
            if any(math.isinf(x) for x in implied):
                continue
            score = max(implied) - min(implied)
            if score < best_score - 1e-12:
                best_score = score
                best_nodes = [cand]
            elif abs(score - best_score) <= 1e-12:
                best_nodes.append(cand)
        first_pred = hears[0][2]
        if not best_nodes:
            guesses[tx_id] = first_pred if first_pred else candidates[0]
        elif first_pred in best_nodes:
            guesses[tx_id] = first_pred
        else:
            guesses[tx_id] = best_nodes[0]
    return guesses


def origin_accuracy(guesses: dict, truth: dict) -> float:
    """Fraction of guessed origins that match the true injection node."""
    if not guesses:
        return 0.0
    hits = sum(1 for tx_id, g in guesses.items() if truth.get(tx_id) == g)
    return hits / len(guesses)
