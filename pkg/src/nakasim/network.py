"""Peer network model: links, regions, the firewall boundary, and the
deterministic event queue.

Link goodput degrades with packet loss through a TCP-style inverse
square-root law. The shipped default profiles are calibrated so that a
1 MB block takes about 3.9 s over an intra-region link and 17.4 s over a
cross-boundary link (a 4.5x slowdown), matching the measured behaviour
the GFW scenarios reproduce. Every constant is a configuration knob.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .mining import ValidationError

# Goodput derating calibration: with the default latency/loss figures
# below (81 ms / 0.2% intra, 218 ms / 6.9% cross) these constants put a
# 1 MB transfer at 3.9 s intra-region and 17.4 s cross-boundary.
LOSS_DERATE_K = 42.638
DEFAULT_BANDWIDTH = 762_674.0  # bytes/second

HEADER_MSG_BYTES = 100
TX_MSG_BYTES = 500
COMPACT_BLOCK_BYTES = 15_000


@dataclass(frozen=True)
class LinkProfile:
    latency: float                      # one-way seconds
    bandwidth: float = DEFAULT_BANDWIDTH  # bytes/second
    loss: float = 0.0                   # packet-loss fraction

    def __post_init__(self):
        if self.latency < 0:
            raise ValidationError("link latency must be >= 0")
        if self.bandwidth <= 0:
            raise ValidationError("link bandwidth must be > 0")
        if not 0 <= self.loss < 1:
            raise ValidationError("link loss must be in [0, 1)")


INTRA_PROFILE = LinkProfile(latency=0.081, bandwidth=DEFAULT_BANDWIDTH,
                            loss=0.002)
CROSS_PROFILE = LinkProfile(latency=0.218, bandwidth=DEFAULT_BANDWIDTH,
                            loss=0.069)


def goodput_derate(loss: float, k: float = LOSS_DERATE_K) -> float:
    """Fraction of nominal bandwidth that survives a lossy link."""
    if loss <= 0:
        return 1.0
    return (1.0 - loss) / (1.0 + k * math.sqrt(loss))


def transfer_time(profile: LinkProfile, size_bytes: float,
                  k: float = LOSS_DERATE_K) -> float:
    """Seconds to move ``size_bytes`` across one link."""
    if size_bytes < 1:
        raise ValidationError("transfer size must be >= 1 byte")
    goodput = profile.bandwidth * goodput_derate(profile.loss, k)
    return profile.latency + size_bytes / goodput


class Topology:
    """Undirected peer graph with region tags on nodes.

    Edges carry symmetric LinkProfiles. The boundary is the set of edges
    whose endpoints lie in different regions.
    """

    def __init__(self):
        self.regions: dict[str, str] = {}
        self.edges: dict[tuple, LinkProfile] = {}
        self.version = 0  # bumped on any connectivity change

    # -- construction ---------------------------------------------------

    def add_node(self, node_id: str, region: str = "default"):
        self.regions[node_id] = region

    def add_edge(self, a: str, b: str, profile: LinkProfile):
        if a not in self.regions or b not in self.regions:
            raise ValidationError(f"edge ({a}, {b}) references unknown node")
        if a == b:
            raise ValidationError("self-edges are not allowed")
        self.edges[self._key(a, b)] = profile
        self.version += 1

    def remove_edge(self, a: str, b: str):
        self.edges.pop(self._key(a, b), None)
        self.version += 1

    @staticmethod
    def _key(a: str, b: str) -> tuple:
        return (a, b) if a < b else (b, a)

    # -- queries ----------------------------------------------------------

    @property
    def nodes(self) -> list[str]:
        return sorted(self.regions)

    def profile(self, a: str, b: str) -> Optional[LinkProfile]:
        return self.edges.get(self._key(a, b))

    def neighbors(self, node: str) -> list[str]:
        out = []
        for (a, b) in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        out.sort()
        return out

    def boundary_edges(self) -> list[tuple]:
        return sorted(k for k in self.edges
                      if self.regions[k[0]] != self.regions[k[1]])

    def is_connected(self) -> bool:
        if not self.regions:
            return True
        adj: dict[str, list] = {n: [] for n in self.regions}
        for (a, b) in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(sorted(self.regions)))
        seen = {start}
        stack = [start]
        while stack:
            for peer in adj[stack.pop()]:
                if peer not in seen:
                    seen.add(peer)
                    stack.append(peer)
        return len(seen) == len(self.regions)


def two_cliques(inside: Iterable[str], outside: Iterable[str],
                inside_region: str = "inside", outside_region: str = "outside",
                intra: LinkProfile = INTRA_PROFILE,
                cross: LinkProfile = CROSS_PROFILE,
                boundary_pairs: Optional[list] = None) -> Topology:
    """Two intra-region cliques joined by boundary edges.

    By default each inside node is paired with one outside node, round
    robin, which keeps the boundary sparse so most cross-boundary block
    deliveries take a relay hop.
    """
    inside, outside = list(inside), list(outside)
    topo = Topology()
    for n in inside:
        topo.add_node(n, inside_region)
    for n in outside:
        topo.add_node(n, outside_region)
    for group in (inside, outside):
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                topo.add_edge(a, b, intra)
    if boundary_pairs is None:
        boundary_pairs = [(a, outside[i % len(outside)])
                          for i, a in enumerate(inside)]
    for a, b in boundary_pairs:
        topo.add_edge(a, b, cross)
    return topo


def star(hub: str, leaves: Iterable[str], profile: LinkProfile,
         region: str = "default") -> Topology:
    topo = Topology()
    topo.add_node(hub, region)
    for leaf in leaves:
        topo.add_node(leaf, region)
        topo.add_edge(hub, leaf, profile)
    return topo


def random_graph(node_ids: Iterable[str], degree: int,
                 rng, latency_range=(0.02, 0.3),
                 bandwidth: float = DEFAULT_BANDWIDTH,
                 region: str = "default") -> Topology:
    """Connected random graph: a ring for connectivity plus random
    chords until the average degree is reached. Latencies are drawn
    uniformly so paths are generically asymmetric."""
    ids = list(node_ids)
    topo = Topology()
    for n in ids:
        topo.add_node(n, region)

    def draw_profile():
        lat = float(rng.uniform(*latency_range))
        return LinkProfile(latency=lat, bandwidth=bandwidth)

    n = len(ids)
    for i in range(n):
        topo.add_edge(ids[i], ids[(i + 1) % n], draw_profile())
    want = max(0, n * degree // 2 - n)
    guard = 0
    while want > 0 and guard < 50 * n:
        guard += 1
        i, j = int(rng.integers(n)), int(rng.integers(n))
        if i == j or topo.profile(ids[i], ids[j]) is not None:
            continue
        topo.add_edge(ids[i], ids[j], draw_profile())
        want -= 1
    return topo


class EventQueue:
    """Priority queue of (fire_time, sequence, event).

    Events dequeue in nondecreasing fire time; ties break by insertion
    sequence so identical runs replay identically.
    """

    def __init__(self):
        self._heap: list = []
        self._seq = 0
        self.now = 0.0

    def __len__(self):
        return len(self._heap)

    def push(self, fire_time: float, event) -> None:
        heapq.heappush(self._heap, (fire_time, self._seq, event))
        self._seq += 1

    def pop(self):
        fire_time, _, event = heapq.heappop(self._heap)
        self.now = fire_time
        return fire_time, event

    def peek_time(self) -> float:
        return self._heap[0][0] if self._heap else math.inf
