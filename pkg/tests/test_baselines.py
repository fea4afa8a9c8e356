"""Tests for src/mesh/baselines.py"""
from __future__ import annotations

import numpy as np
import pytest

from src.mesh.baselines import (
    COMMON_CHANNEL,
    StaticAssignment,
    shared_channel_graph,
    single_radio_route,
    static_assign,
    static_route,
)
from src.mesh.routing import EstablishedRoute, FailureReason, RouteFailure, shortest_path
from src.mesh.topology import Topology, line_topology, random_topology


def test_full_radio_nodes_carry_every_channel():
    topo = line_topology(4, 200.0, channels=3, interfaces=3)
    assignment = static_assign(topo, 3, 3)
    assert not assignment.fallback
    for n in range(4):
        assert sorted(assignment.channels_of(n)) == [1, 2, 3]


def test_single_interface_falls_back_to_common_channel():
    topo = line_topology(4, 200.0, channels=3, interfaces=1)
    assignment = static_assign(topo, 3, 1)
    # consecutive degree ranks land on different channels, so the spread cannot connect the line
    assert assignment.fallback
    assert all(assignment.channels_of(n) == (1,) for n in range(4))


@pytest.mark.parametrize("seed", range(5))
def test_random_mesh_neighbors_share_a_channel(seed):
    topo = random_topology(30, seed=seed)
    assignment = static_assign(topo, 4, 2, seed=seed)
    for a, b in topo.graph().edges():
        assert assignment.shared_channels(a, b)
    for n in range(topo.node_count):
        chans = assignment.channels_of(n)
        assert len(chans) == 2 and len(set(chans)) == 2
        assert all(1 <= ch <= 4 for ch in chans)


def test_assign_requires_enough_channels():
    topo = line_topology(3, 200.0, channels=3, interfaces=3)
    with pytest.raises(ValueError):
        static_assign(topo, 2, 3)


def test_assignment_digest_is_stable():
    topo = random_topology(30, seed=7)
    first = static_assign(topo, 4, 2, seed=3)
    second = static_assign(topo, 4, 2, seed=3)
    assert first == second
    assert first.digest() == second.digest()
    assert len(first.digest()) == 32


def test_shared_channels_follow_sender_order():
    assignment = StaticAssignment(((3, 1), (1, 3), (2, 4)))
    assert assignment.shared_channels(0, 1) == [3, 1]
    assert assignment.shared_channels(1, 0) == [1, 3]
    assert assignment.shared_channels(0, 2) == []


def test_static_route_matches_shortest_path():
    topo = random_topology(30, seed=1)
    assignment = static_assign(topo, 4, 4)
    route = static_route(assignment, topo, 0, 17, flow_id=3, now=1.5)
    assert isinstance(route, EstablishedRoute)
    assert list(route.path) == shortest_path(shared_channel_graph(assignment, topo), 0, 17)
    for u, v, ch in route.hops:
        assert ch == assignment.shared_channels(u, v)[0]
    assert route.flow_id == 3 and route.established_at == 1.5


def test_static_route_without_shared_channel_is_no_path():
    topo = line_topology(3, 200.0, channels=3, interfaces=1)
    assignment = StaticAssignment(((1,), (2,), (2,)))
    assert static_route(assignment, topo, 0, 2) == RouteFailure(FailureReason.NO_PATH)
    assert isinstance(static_route(assignment, topo, 1, 2), EstablishedRoute)


def test_single_radio_uses_common_channel():
    topo = random_topology(30, seed=4)
    route = single_radio_route(topo, 2, 25)
    assert isinstance(route, EstablishedRoute)
    assert set(route.channels) == {COMMON_CHANNEL}
    assert list(route.path) == shortest_path(topo.graph(), 2, 25)


def test_single_radio_unreachable():
    topo = Topology(np.array([[0.0, 0.0], [1000.0, 1000.0]]), channels=2, interfaces=1)
    assert single_radio_route(topo, 0, 1) == RouteFailure(FailureReason.NO_PATH)


@pytest.mark.parametrize("interfaces,src,dst,path,channels", [
    # (1,3) (3,2) (2,1) (1,3) (3,2): each hop takes the sender's first channel the receiver also carries
    (((1, 3), (3, 2), (2, 1), (1, 3), (3, 2)), 0, 4, (0, 1, 2, 3, 4), (3, 2, 1, 3)),
    (((1, 3), (3, 2), (2, 1), (1, 3), (3, 2)), 4, 0, (4, 3, 2, 1, 0), (3, 1, 2, 3)),
    (((1, 2), (2, 1), (1, 2), (2, 1), (1, 2)), 0, 4, (0, 1, 2, 3, 4), (1, 2, 1, 2)),
    (((1, 2), (2, 1), (1, 2), (2, 1), (1, 2)), 3, 1, (3, 2, 1), (2, 1)),
])
def test_static_route_on_alternating_line(interfaces, src, dst, path, channels):
    topo = line_topology(5, 200.0, channels=3, interfaces=2)
    route = static_route(StaticAssignment(interfaces), topo, src, dst)
    assert route.path == path
    assert route.channels == channels


def test_static_route_stops_at_a_channel_gap():
    topo = line_topology(5, 200.0, channels=2, interfaces=1)
    assignment = StaticAssignment(((1,), (1,), (2,), (2,), (2,)))
    assert static_route(assignment, topo, 0, 4) == RouteFailure(FailureReason.NO_PATH)
    route = static_route(assignment, topo, 2, 4)
    assert route.path == (2, 3, 4) and route.channels == (2, 2)
