"""
Comparison Baselines
Static multi-radio channel assignment and the single common-channel radio,
both producing EstablishedRoute objects the simulator forwards over.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

import networkx as nx
import numpy as np

from src.mesh.routing import EstablishedRoute, FailureReason, RouteFailure, shortest_path
from src.mesh.topology import Topology

logger = logging.getLogger(__name__)

COMMON_CHANNEL = 1

##command


@dataclass(frozen=True)
class StaticAssignment:
    """Per-node tuple of interface channels; index in the tuple is the interface index."""

    interfaces: Tuple[Tuple[int, ...], ...]
    fallback: bool = False

    def channels_of(self, node: int) -> Tuple[int, ...]:
        return self.interfaces[node]

    def shared_channels(self, a: int, b: int) -> List[int]:
        """Channels both nodes carry, in a's interface order."""
        theirs = set(self.interfaces[b])
        return [ch for ch in self.interfaces[a] if ch in theirs]

    def digest(self) -> str:
        return hashlib.md5(repr(self.interfaces).encode('utf8')).hexdigest()


def _degree_rank(topology: Topology, seed: int) -> List[int]:
    rng = np.random.default_rng(seed)
    tiebreak = rng.permutation(topology.node_count)
    order = sorted(range(topology.node_count),
                   key=lambda n: (-len(topology.neighbors(n)), int(tiebreak[n])))
    rank = [0] * topology.node_count
    for position, node in enumerate(order):
        rank[node] = position
    return rank


def static_assign(topology: Topology, channels: int, interfaces: int, seed: int = 0) -> StaticAssignment:
    """
    Fixed channels per interface: interface i of the node with degree rank r
    carries channel ((i + r) mod C) + 1. If some neighbor pair ends up without
    a common channel, every node falls back to channels 1..K (interface 0 on
    channel 1 everywhere).
    """
    if channels < interfaces:
        raise ValueError(f"C >= K required (got C={channels}, K={interfaces})")
    rank = _degree_rank(topology, seed)
    spread = tuple(tuple(((i + rank[n]) % channels) + 1 for i in range(interfaces))
                   for n in range(topology.node_count))
    assignment = StaticAssignment(spread)

    g = topology.graph()
    if all(assignment.shared_channels(a, b) for a, b in g.edges()):
        return assignment

    logger.info("static spread leaves neighbor pairs without a common channel; using common-channel fallback")
    common = tuple(range(1, interfaces + 1))
    return StaticAssignment(tuple(common for _ in range(topology.node_count)), fallback=True)


def shared_channel_graph(assignment: StaticAssignment, topology: Topology) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(topology.node_count))
    g.add_edges_from((a, b) for a, b in topology.graph().edges() if assignment.shared_channels(a, b))
    return g


def static_route(assignment: StaticAssignment, topology: Topology, src: int, dst: int,
                 flow_id: int = 0, now: float = 0.0) -> Union[EstablishedRoute, RouteFailure]:
    """Shortest path over links sharing a channel; each hop uses the sender's first shared interface."""
    path = shortest_path(shared_channel_graph(assignment, topology), src, dst)
    if path is None:
        return RouteFailure(FailureReason.NO_PATH)
    channels = tuple(assignment.shared_channels(u, v)[0] for u, v in zip(path, path[1:]))
    return EstablishedRoute(flow_id, tuple(path), channels, now)


def single_radio_route(topology: Topology, src: int, dst: int,
                       flow_id: int = 0, now: float = 0.0) -> Union[EstablishedRoute, RouteFailure]:
    path = shortest_path(topology.graph(), src, dst)
    if path is None:
        return RouteFailure(FailureReason.NO_PATH)
    return EstablishedRoute(flow_id, tuple(path), (COMMON_CHANNEL,) * (len(path) - 1), now)
