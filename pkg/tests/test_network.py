"""Link model, topology builders, event queue."""

import numpy as np
import pytest

from nakasim.mining import ValidationError
from nakasim.network import (CROSS_PROFILE, INTRA_PROFILE, EventQueue,
                             LinkProfile, Topology, random_graph, star,
                             transfer_time, two_cliques,
                             COMPACT_BLOCK_BYTES)

MB = 1_000_000


def test_lossless_link_is_pure_bandwidth():
    prof = LinkProfile(latency=0.0, bandwidth=1000.0, loss=0.0)
    assert transfer_time(prof, 500) == pytest.approx(0.5)


def test_intra_profile_moves_a_megabyte_in_3_9s():
    t = transfer_time(INTRA_PROFILE, MB)
    assert abs(t - 3.9) / 3.9 < 0.05


def test_cross_profile_moves_a_megabyte_in_17_4s():
    t = transfer_time(CROSS_PROFILE, MB)
    assert abs(t - 17.4) / 17.4 < 0.05
    # the boundary slowdown is about 4.5x
    assert t / transfer_time(INTRA_PROFILE, MB) > 4.0


def test_compact_payload_cuts_bandwidth_98_percent():
    assert 1 - COMPACT_BLOCK_BYTES / MB >= 0.98


def test_transfer_size_must_be_positive():
    with pytest.raises(ValidationError):
        transfer_time(INTRA_PROFILE, 0)


def test_profile_validation():
    with pytest.raises(ValidationError):
        LinkProfile(latency=-1.0)
    with pytest.raises(ValidationError):
        LinkProfile(latency=0.0, bandwidth=0.0)
    with pytest.raises(ValidationError):
        LinkProfile(latency=0.0, loss=1.0)


def test_event_queue_orders_by_time_then_insertion():
    q = EventQueue()
    q.push(5.0, "late")
    q.push(1.0, "first-tie")
    q.push(1.0, "second-tie")
    q.push(0.5, "early")
    popped = [q.pop()[1] for _ in range(4)]
    assert popped == ["early", "first-tie", "second-tie", "late"]
    assert q.now == 5.0


def test_two_cliques_shape():
    topo = two_cliques(["a", "b"], ["x", "y", "z"])
    assert topo.is_connected()
    assert topo.regions["a"] == "inside" and topo.regions["z"] == "outside"
    boundary = topo.boundary_edges()
    assert len(boundary) == 2  # one per inside node, round robin
    assert topo.profile("a", "b") == INTRA_PROFILE
    for e in boundary:
        assert topo.edges[e] == CROSS_PROFILE


def test_star_and_random_builders():
    topo = star("hub", [f"l{i}" for i in range(5)], INTRA_PROFILE)
    assert topo.is_connected()
    assert len(topo.neighbors("hub")) == 5

    rng = np.random.default_rng(0)
    rnd = random_graph([f"n{i}" for i in range(12)], degree=4, rng=rng)
    assert rnd.is_connected()
    degs = [len(rnd.neighbors(n)) for n in rnd.nodes]
    assert sum(degs) / len(degs) >= 3.0


def test_edges_validate_endpoints():
    topo = Topology()
    topo.add_node("a")
    with pytest.raises(ValidationError):
        topo.add_edge("a", "ghost", INTRA_PROFILE)
    with pytest.raises(ValidationError):
        topo.add_edge("a", "a", INTRA_PROFILE)
