"""
Cross-layer Route Discovery
AODV-style request/reply discovery extended with channel fields. Each hop is
negotiated with the R-CA distribution step; discoveries that must wait for a
channel are kept as resumable state and advanced by simulator events.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from itertools import islice
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from src.mesh.chanstate import ChannelInfo, OccupancyReason
from src.mesh.rca_protocol import (
    ChannelBroadcast,
    Response,
    StepKind,
    WaitNotify,
    on_broadcast,
    on_channel_freed,
    step_distribution,
)
from src.mesh.topology import Topology

logger = logging.getLogger(__name__)

# kind, nodes, channels, flow, outcome
TraceFn = Callable[[str, Sequence[int], Sequence[int], Optional[int], str], None]
SHARED_OUTCOME = 'SHARED'
MAX_SHARED_PATHS = 64

##command


class FailureReason(str, Enum):
    NO_PATH = 'NO_PATH'
    NO_CHANNEL = 'NO_CHANNEL'


@dataclass(frozen=True)
class RouteFailure:
    reason: FailureReason


@dataclass(frozen=True)
class RouteRequest:
    origin: int
    destination: int
    request_id: int
    hop_list: Tuple[int, ...]
    response_info: Optional[Response] = None
    excluded: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if not self.hop_list or self.hop_list[0] != self.origin:
            raise ValueError("hop_list must begin with the origin")
        if len(set(self.hop_list)) != len(self.hop_list):
            raise ValueError("hop_list may not repeat nodes")


@dataclass(frozen=True)
class RouteReply:
    destination: int
    path: Tuple[int, ...]
    channels: Tuple[int, ...]
    c_pre: Optional[int]
    t_pre: float


@dataclass
class EstablishedRoute:
    flow_id: int
    path: Tuple[int, ...]
    channels: Tuple[int, ...]
    established_at: float
    t_pre: float = math.inf
    torn_down: bool = False
    negotiated: bool = True

    def __post_init__(self):
        if len(self.channels) != len(self.path) - 1:
            raise ValueError("a route needs exactly one channel per hop")

    @property
    def hops(self) -> List[Tuple[int, int, int]]:
        return [(self.path[i], self.path[i + 1], self.channels[i]) for i in range(len(self.channels))]

    def reply(self) -> RouteReply:
        return RouteReply(self.path[-1], self.path, self.channels,
                          self.channels[0] if self.channels else None, self.t_pre)


class DiscoveryStatus(str, Enum):
    SEARCHING = 'SEARCHING'
    WAITING = 'WAITING'
    ESTABLISHED = 'ESTABLISHED'
    FAILED = 'FAILED'
    ABORTED = 'ABORTED'


@dataclass
class Discovery:
    """In-progress discovery; doubles as the WAITING handle resumed by a WaitNotify."""

    flow_id: int
    src: int
    dst: int
    request_id: int
    flow_t_pre: float
    deadline: float
    path: List[int] = field(default_factory=list)
    channels: List[int] = field(default_factory=list)
    excluded: set = field(default_factory=set)
    refused_edges: set = field(default_factory=set)
    status: DiscoveryStatus = DiscoveryStatus.SEARCHING
    waiting_on: Optional[Tuple[int, int]] = None
    last_request: Optional[RouteRequest] = None
    channel_blocked: bool = False

    @property
    def frontier(self) -> int:
        return self.path[-1]


DiscoveryResult = Union[EstablishedRoute, RouteFailure, Discovery]


def shortest_path(graph: nx.Graph, src: int, dst: int, allowed: Optional[Iterable[int]] = None) -> Optional[List[int]]:
    """Shortest-hop path; ties resolved toward the lowest NodeId at every step."""
    g = graph if allowed is None else graph.subgraph(set(allowed) | {src, dst})
    if src not in g or dst not in g:
        return None
    dist = nx.single_source_shortest_path_length(g, dst)
    if src not in dist:
        return None
    path = [src]
    while path[-1] != dst:
        here = path[-1]
        path.append(min(n for n in g.neighbors(here) if dist.get(n, math.inf) == dist[here] - 1))
    return path


class Router:
    """
    R-CA route discovery over the channel tables of every node.

    ``notifications`` accumulates WaitNotify messages produced by releases;
    the caller drains it after each operation and delivers them.
    """

    def __init__(self, topology: Topology, states: Mapping[int, ChannelInfo], wait_timeout: float = 2.0,
                 tpre_rule: str = 'accumulate', trace: Optional[TraceFn] = None):
        self.topology = topology
        self.states = states
        self.wait_timeout = wait_timeout
        self.tpre_rule = tpre_rule
        self.trace = trace or (lambda *args: None)
        self.graph = topology.graph()
        self.notifications: List[WaitNotify] = []
        self._request_ids: Dict[int, int] = defaultdict(int)
        self._waiting: Dict[Tuple[int, int], Discovery] = {}
        self.active: Dict[int, EstablishedRoute] = {}

    def drain_notifications(self) -> List[WaitNotify]:
        out, self.notifications = self.notifications, []
        return out

    def _broadcast(self, msg: ChannelBroadcast, partner: int, flow_id: Optional[int], now: float):
        self.trace('BROADCAST', (msg.sender,), (msg.channel,), flow_id, f"t_pre={msg.t_pre:.6f}")
        for n in self.topology.sorted_neighbors(msg.sender):
            if n != partner:
                on_broadcast(self.states[n], msg, now)

    def reserve(self, path: Sequence[int], channels: Sequence[int], flow_id: int, now: float,
                t_pre: float) -> EstablishedRoute:
        """Occupy a known route directly (fixed set-ups and pre-existing traffic)."""
        route = EstablishedRoute(flow_id, tuple(path), tuple(channels), now, t_pre)
        for u, v, ch in route.hops:
            for node, partner in ((u, v), (v, u)):
                info = self.states[node]
                info.occupy(ch, OccupancyReason.SELF_TX, math.inf)
                info.c_pre = ch
                info.t_pre = max(info.t_pre, t_pre)
                self._broadcast(ChannelBroadcast(node, ch, t_pre), partner, flow_id, now)
        self.active[flow_id] = route
        return route

    def discover_route(self, flow_id: int, src: int, dst: int, now: float, flow_t_pre: float,
                       excluded: Iterable[int] = ()) -> DiscoveryResult:
        if src == dst:
            raise ValueError("source and destination must differ")
        self.topology._check(src)
        self.topology._check(dst)

        self._request_ids[src] += 1
        rid = self._request_ids[src]
        excluded = set(excluded) - {src, dst}
        self.trace('RREQ', (src, dst), (), flow_id, f"request_id={rid}")

        allowed = set(range(self.topology.node_count)) - excluded
        if shortest_path(self.graph, src, dst, allowed) is None:
            self.trace('ROUTE_FAIL', (src, dst), (), flow_id, FailureReason.NO_PATH.value)
            return RouteFailure(FailureReason.NO_PATH)

        d = Discovery(flow_id, src, dst, rid, flow_t_pre, now + self.wait_timeout,
                      path=[src], excluded=excluded)
        return self._advance(d, now)

    def _next_hop(self, d: Discovery) -> Optional[int]:
        allowed = set(range(self.topology.node_count)) - d.excluded - set(d.path[:-1])
        graph = self.graph
        if d.refused_edges:
            # the destination cannot be blacklisted, so its refusals close single edges
            graph = nx.restricted_view(self.graph, [], list(d.refused_edges))
        path = shortest_path(graph, d.frontier, d.dst, allowed)
        return path[1] if path else None

    def _shared_elsewhere(self, node: int, ch: int) -> bool:
        return any(not r.negotiated and any(c == ch and node in (a, b) for a, b, c in r.hops)
                   for r in self.active.values())

    def _release_hop(self, u: int, v: int, ch: int, now: float,
                     reason: OccupancyReason = OccupancyReason.SELF_TX):
        for node in (u, v):
            if reason is OccupancyReason.SHARED_TX and self._shared_elsewhere(node, ch):
                continue
            info = self.states[node]
            freed = info.release(ch, reason, now)
            if freed:
                notify = on_channel_freed(info, node, ch, now)
                if notify is not None:
                    self.notifications.append(notify)

    def _backtrack(self, d: Discovery, now: float):
        dropped = d.path.pop()
        ch = d.channels.pop()
        self._release_hop(d.frontier, dropped, ch, now)
        d.excluded.add(dropped)
        self.trace('BACKTRACK', (d.frontier, dropped), (ch,), d.flow_id, 'released')

    def _advance(self, d: Discovery, now: float) -> DiscoveryResult:
        d.status = DiscoveryStatus.SEARCHING
        while d.frontier != d.dst:
            nxt = self._next_hop(d)
            if nxt is None:
                if len(d.path) == 1:
                    return self._fail(d, now)
                self._backtrack(d, now)
                continue

            d.last_request = RouteRequest(d.src, d.dst, d.request_id, tuple(d.path), None, frozenset(d.excluded))
            u = d.frontier
            step = step_distribution(self.topology, u, nxt, self.states[u], self.states[nxt], now,
                                     d.flow_t_pre, block_expiry=d.deadline, tpre_rule=self.tpre_rule)

            if step.kind is StepKind.PROCEED:
                self.trace('RCA_REQUEST', (u, nxt), (step.channel,), d.flow_id, 'AVAILABLE')
                d.path.append(nxt)
                d.channels.append(step.channel)
                for msg in step.broadcasts:
                    self._broadcast(msg, nxt if msg.sender == u else u, d.flow_id, now)
                continue

            d.channel_blocked = True
            if step.kind is StepKind.REROUTE:
                if step.blocked_at == u:
                    self.trace('RCA_REQUEST', (u, nxt), (), d.flow_id, 'SENDER_BLOCKED')
                    if len(d.path) == 1:
                        return self._fail(d, now)
                    self._backtrack(d, now)
                else:
                    self.trace('RCA_REQUEST', (u, nxt), (self.states[u].c_pre,), d.flow_id, 'ROUTE_ELSEWHERE')
                    if nxt == d.dst:
                        d.refused_edges.add((u, nxt))
                    else:
                        d.excluded.add(nxt)
                continue

            q_len, q_max = step.queue_length, self.states[nxt].q_max
            self.trace('RCA_REQUEST', (u, nxt), (self.states[u].c_pre,), d.flow_id, f"WAIT queue={q_len}/{q_max}")
            d.status = DiscoveryStatus.WAITING
            d.waiting_on = (u, nxt)
            self._waiting[(u, nxt)] = d
            return d

        return self._establish(d, now)

    def _establish(self, d: Discovery, now: float) -> EstablishedRoute:
        route = EstablishedRoute(d.flow_id, tuple(d.path), tuple(d.channels), now, d.flow_t_pre)
        # tentative blocks only cover the discovery; re-announce for the flow's lifetime
        for u, v, ch in route.hops:
            self._broadcast(ChannelBroadcast(u, ch, d.flow_t_pre), v, d.flow_id, now)
            self._broadcast(ChannelBroadcast(v, ch, d.flow_t_pre), u, d.flow_id, now)
        d.status = DiscoveryStatus.ESTABLISHED
        self.active[d.flow_id] = route
        self.trace('RREP', route.path, route.channels, d.flow_id, 'ESTABLISHED')
        logger.debug("flow %s route %s channels %s", d.flow_id, route.path, route.channels)
        return route

    def _fail(self, d: Discovery, now: float) -> RouteFailure:
        reason = FailureReason.NO_CHANNEL if d.channel_blocked else FailureReason.NO_PATH
        d.status = DiscoveryStatus.FAILED
        self.trace('ROUTE_FAIL', (d.src, d.dst), (), d.flow_id, reason.value)
        return RouteFailure(reason)

    def find_waiting(self, notify: WaitNotify) -> Optional[Discovery]:
        return self._waiting.get((notify.waiter, notify.waited_node))

    def resume_waiting(self, d: Discovery, notify: WaitNotify, now: float) -> Optional[DiscoveryResult]:
        """Retry the frontier hop after the waited node freed a channel. Stale notifies return None."""
        if d.status is not DiscoveryStatus.WAITING or d.waiting_on != (notify.waiter, notify.waited_node):
            self.trace('NOTIFY', (notify.waited_node, notify.waiter), (notify.freed_channel,), d.flow_id, 'stale')
            return None
        self._waiting.pop(d.waiting_on, None)
        d.waiting_on = None
        self.trace('NOTIFY', (notify.waited_node, notify.waiter), (notify.freed_channel,), d.flow_id, 'resume')
        return self._advance(d, now)

    def abort(self, d: Discovery, now: float) -> RouteFailure:
        """Give up a discovery: leave any queue and release every partially granted hop."""
        if d.waiting_on is not None:
            waiter, waited = d.waiting_on
            self.states[waited].remove_waiter(waiter)
            self._waiting.pop(d.waiting_on, None)
            d.waiting_on = None
        while len(d.path) > 1:
            v = d.path.pop()
            self._release_hop(d.path[-1], v, d.channels.pop(), now)
        d.status = DiscoveryStatus.ABORTED
        self.trace('ROUTE_FAIL', (d.src, d.dst), (), d.flow_id, FailureReason.NO_CHANNEL.value)
        return RouteFailure(FailureReason.NO_CHANNEL)

    def hops_in_use(self) -> List[Tuple[int, int, int]]:
        """Hops of every active route plus the hops already granted to waiting discoveries."""
        hops = [h for r in self.active.values() for h in r.hops]
        for d in self._waiting.values():
            hops.extend(zip(d.path, d.path[1:], d.channels))
        return hops

    def _least_interfering(self, u: int, v: int, placed: Sequence[Tuple[int, int, int]],
                           tuned: Tuple[set, set]) -> Tuple[int, int]:
        """
        (channel, conflicts) for hop u->v against ``placed`` under the topology's
        interference model. Among equally good channels, one both endpoints can
        tune without exceeding K radios wins, then the lowest id.
        """
        k = self.topology.interfaces

        def cost(ch: int) -> Tuple[int, bool, int]:
            conflicts = sum(1 for x, y, c in placed if self.topology.interferes(u, v, ch, x, y, c))
            over_budget = any(ch not in r and len(r) >= k for r in tuned)
            return conflicts, over_budget, ch

        best = min(cost(ch) for ch in range(1, self.topology.channels + 1))
        return best[2], best[0]

    def plan_shared_channels(self, path: Sequence[int], now: float) -> Tuple[List[int], int]:
        """Greedy least-interfering channels along ``path`` and the conflicts they incur."""
        placed = self.hops_in_use()
        tuned = {n: set(self.states[n].radio_channels(now)) for n in path}
        channels, total = [], 0
        for u, v in zip(path, path[1:]):
            ch, conflicts = self._least_interfering(u, v, placed, (tuned[u], tuned[v]))
            placed.append((u, v, ch))
            tuned[u].add(ch)
            tuned[v].add(ch)
            channels.append(ch)
            total += conflicts
        return channels, total

    def shared_route(self, flow_id: int, src: int, dst: int, now: float,
                     flow_t_pre: float) -> Union[EstablishedRoute, RouteFailure]:
        """
        Best-effort route for a flow negotiation could not place.

        Among the minimum-hop paths (at most MAX_SHARED_PATHS of them) the one whose
        greedy channel plan conflicts least wins, ties to the lowest path. Endpoints
        hold each channel as SHARED_TX and announce it like a grant, so later
        negotiations steer around it; everything lapses at ``flow_t_pre`` unless
        torn down first.
        """
        if src == dst:
            raise ValueError("source and destination must differ")
        first = shortest_path(self.graph, src, dst)
        if first is None:
            self.trace('ROUTE_FAIL', (src, dst), (), flow_id, FailureReason.NO_PATH.value)
            return RouteFailure(FailureReason.NO_PATH)

        candidates = {tuple(first)}
        candidates.update(tuple(p) for p in islice(nx.all_shortest_paths(self.graph, src, dst), MAX_SHARED_PATHS))
        plans = [(self.plan_shared_channels(p, now), p) for p in sorted(candidates)]
        (channels, conflicts), path = min(plans, key=lambda item: (item[0][1], item[1]))

        for u, v, ch in zip(path, path[1:], channels):
            for node, partner in ((u, v), (v, u)):
                self.states[node].occupy(ch, OccupancyReason.SHARED_TX, flow_t_pre)
                self._broadcast(ChannelBroadcast(node, ch, flow_t_pre), partner, flow_id, now)

        route = EstablishedRoute(flow_id, tuple(path), tuple(channels), now, flow_t_pre, negotiated=False)
        self.active[flow_id] = route
        self.trace('RREP', route.path, route.channels, flow_id, SHARED_OUTCOME)
        logger.debug("flow %s shared route %s channels %s (%d conflicts)", flow_id, route.path, route.channels, conflicts)
        return route

    def teardown(self, route: EstablishedRoute, now: float) -> List[WaitNotify]:
        """Release every hop of a route at both endpoints. A second call is a no-op."""
        if route.torn_down:
            return []
        before = len(self.notifications)
        if self.active.get(route.flow_id) is route:
            del self.active[route.flow_id]
        reason = OccupancyReason.SELF_TX if route.negotiated else OccupancyReason.SHARED_TX
        for u, v, ch in route.hops:
            self._release_hop(u, v, ch, now, reason)
        route.torn_down = True
        self.trace('ROUTE_DOWN', route.path, route.channels, route.flow_id, 'released')
        return self.notifications[before:]

    def expire(self, node: int, now: float) -> List[WaitNotify]:
        """Purge expired entries at ``node`` and hand freed channels to its waiters."""
        info = self.states[node]
        before = len(self.notifications)
        for ch in info.purge_expired(now):
            notify = on_channel_freed(info, node, ch, now)
            if notify is not None:
                self.notifications.append(notify)
        return self.notifications[before:]
