"""
Discrete-Event Simulation Kernel
Time-ordered event queue, CBR traffic, per-interface forwarding, collision
resolution under the interference model, metrics and the replayable trace.

One seeded generator family per run; streams are derived from the run seed as
  placement      -> random_topology(seed=topology_seed or seed)
  [seed, 1]      -> flow endpoint order
  [seed, 2]      -> CBR jitter
  [seed, 3]      -> flow start offsets
  seed           -> static assignment tie-break
so every algorithm sees the same topology and workload for a given seed.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Deque, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from src.mesh.baselines import single_radio_route, static_assign, static_route
from src.mesh.chanstate import ChannelInfo, estimate_tpre
from src.mesh.routing import Discovery, DiscoveryStatus, EstablishedRoute, FailureReason, RouteFailure, Router
from src.mesh.scenario import ConfigError, Scenario
from src.mesh.topology import Topology

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ('time', 'sequence', 'kind', 'nodes', 'channel', 'flow', 'outcome')

##command


class EventKind(str, Enum):
    FLOW_START = 'FLOW_START'
    FLOW_STOP = 'FLOW_STOP'
    PACKET_SEND = 'PACKET_SEND'
    PACKET_ARRIVE = 'PACKET_ARRIVE'
    CHANNEL_EXPIRE = 'CHANNEL_EXPIRE'
    NOTIFY = 'NOTIFY'
    DISCOVERY_TIMEOUT = 'DISCOVERY_TIMEOUT'
    DISCOVERY_RETRY = 'DISCOVERY_RETRY'
    ROUTE_READY = 'ROUTE_READY'


@dataclass(order=True)
class Event:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)


@dataclass(frozen=True)
class Flow:
    id: int
    src: int
    dst: int
    rate: float
    packet_size: int = 512
    start: float = 0.0
    stop: float = 50.0

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError(f"flow {self.id}: start ({self.start}) must precede stop ({self.stop})")
        if not self.rate > 0:
            raise ValueError(f"flow {self.id}: rate must be positive (got {self.rate})")
        if self.src == self.dst:
            raise ValueError(f"flow {self.id}: source and destination must differ")

    @property
    def packet_count(self) -> int:
        return int(math.ceil((self.stop - self.start) * self.rate - 1e-9))

    def remaining_packets(self, now: float) -> int:
        return max(0, int(math.ceil((self.stop - max(now, self.start)) * self.rate - 1e-9)))

    def send_times(self, rng: np.random.Generator, jitter: float) -> np.ndarray:
        """Nominal CBR instants plus a uniform jitter below ``jitter`` gaps, all before stop."""
        base = self.start + np.arange(self.packet_count) / self.rate
        spread = np.minimum(jitter / self.rate, (self.stop - base) * 0.999)
        return base + rng.uniform(0.0, 1.0, size=len(base)) * spread


class Outcome(str, Enum):
    DELIVERED = 'DELIVERED'
    COLLIDED = 'COLLIDED'


@dataclass(frozen=True)
class Transmission:
    tx: int
    rx: int
    channel: int
    start: float
    end: float
    flow_id: int = -1
    packet_id: int = -1

    def overlaps(self, other: 'Transmission') -> bool:
        return self.start < other.end and other.start < self.end


def resolve_transmission(active: Sequence[Transmission], topology: Topology) -> List[Outcome]:
    """A transmission collides iff it time-overlaps an interfering one; both sides lose (no capture)."""
    outcomes = []
    for i, t in enumerate(active):
        hit = any(j != i and t.overlaps(o) and topology.interferes(t.tx, t.rx, t.channel, o.tx, o.rx, o.channel)
                  for j, o in enumerate(active))
        outcomes.append(Outcome.COLLIDED if hit else Outcome.DELIVERED)
    return outcomes


@dataclass
class FlowMetrics:
    flow_id: int
    src: int
    dst: int
    packet_size: int
    start: float
    stop: float
    sent: int = 0
    delivered: int = 0
    collided: int = 0
    dropped: int = 0
    in_flight: int = 0
    route_hops: Optional[int] = None

    @property
    def delivery_rate(self) -> float:
        return self.delivered / self.sent if self.sent else 0.0

    @property
    def throughput_kbps(self) -> float:
        return self.delivered * self.packet_size * 8 / (self.stop - self.start) / 1000


@dataclass
class Metrics:
    flows: List[FlowMetrics] = field(default_factory=list)

    def _total(self, name: str) -> int:
        return sum(getattr(f, name) for f in self.flows)

    @property
    def sent(self) -> int:
        return self._total('sent')

    @property
    def delivered(self) -> int:
        return self._total('delivered')

    @property
    def collided(self) -> int:
        return self._total('collided')

    @property
    def dropped(self) -> int:
        return self._total('dropped')

    @property
    def in_flight(self) -> int:
        return self._total('in_flight')

    @property
    def delivery_rate(self) -> float:
        """Mean of the per-flow delivery rates (0 without flows)."""
        return float(np.mean([f.delivery_rate for f in self.flows])) if self.flows else 0.0

    @property
    def throughput_kbps(self) -> float:
        return float(np.mean([f.throughput_kbps for f in self.flows])) if self.flows else 0.0

    def to_frame(self) -> pd.DataFrame:
        columns = ['flow_id', 'src', 'dst', 'sent', 'delivered', 'collided', 'dropped', 'in_flight',
                   'route_hops', 'delivery_rate', 'throughput_kbps']
        rows = [{c: getattr(f, c) for c in columns} for f in self.flows]
        return pd.DataFrame(rows, columns=columns)

    def digest(self) -> str:
        return hashlib.md5(self.to_frame().to_csv(index=False, float_format='%.9f').encode('utf8')).hexdigest()


def collect(accumulators: Mapping[int, FlowMetrics]) -> Metrics:
    """Freeze per-flow accumulators into Metrics, ordered by flow id."""
    flows = [accumulators[k] for k in sorted(accumulators)]
    for f in flows:
        if f.delivered > f.sent or f.delivered + f.collided + f.dropped + f.in_flight != f.sent:
            raise RuntimeError(f"packet conservation violated for flow {f.flow_id}: {f}")
    return Metrics(flows)


def _join(values: Sequence[Any]) -> str:
    return ','.join(str(v) for v in values) if values else '-'


class TraceLog:
    """
    Line-oriented, tab-separated event trace. The digest covers every line
    (header included) even when lines are not retained in memory.
    """

    def __init__(self, keep: bool = True):
        self.keep = keep
        self.header: List[str] = []
        self.lines: List[str] = []
        self.count = 0
        self._hash = hashlib.sha256()

    def add_header(self, *fields: Any):
        line = '#\t' + '\t'.join(str(f) for f in fields)
        self._hash.update((line + '\n').encode('utf8'))
        self.header.append(line)

    def record(self, time: float, kind: str, nodes: Sequence[int] = (), channels: Sequence[int] = (),
               flow: Optional[int] = None, outcome: str = '-'):
        line = '\t'.join((f"{time:.9f}", str(self.count), kind, _join(nodes), _join(channels),
                          '-' if flow is None else str(flow), outcome or '-'))
        self.count += 1
        self._hash.update((line + '\n').encode('utf8'))
        if self.keep:
            self.lines.append(line)

    def digest(self) -> str:
        return self._hash.hexdigest()

    def text(self) -> str:
        return ''.join(line + '\n' for line in itertools.chain(self.header, self.lines))

    def write(self, path: Union[str, Path]):
        if not self.keep:
            raise RuntimeError("trace lines were not retained for this run")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.text(), encoding='utf8')


@dataclass
class SimulationResult:
    metrics: Metrics
    trace: TraceLog
    topology: Topology
    flows: List[Flow]
    routes: List[EstablishedRoute] = field(default_factory=list)

    def __iter__(self) -> Iterator[Any]:
        yield self.metrics
        yield self.trace


def build_flows(scenario: Scenario, topology: Topology, seed: int) -> List[Flow]:
    """Endpoints by policy; random pairs are drawn as a prefix of one seeded shuffle."""
    if scenario.flows == 0:
        return []
    if scenario.flow_endpoint_policy == 'fixed_list':
        pairs = list(scenario.flow_list[:scenario.flows])
    else:
        lengths = dict(nx.all_pairs_shortest_path_length(topology.graph()))
        reachable = [(a, b) for a in range(topology.node_count) for b in range(topology.node_count)
                     if a != b and b in lengths[a]]
        candidates = [(a, b) for a, b in reachable if lengths[a][b] >= scenario.min_hops]
        if len(candidates) < scenario.flows:
            logger.info("only %d pairs at >= %d hops; relaxing to any reachable pair",
                        len(candidates), scenario.min_hops)
            candidates = reachable
        if len(candidates) < scenario.flows:
            raise ConfigError(f"topology offers {len(candidates)} endpoint pairs, {scenario.flows} flows requested")
        order = np.random.default_rng([seed, 1]).permutation(len(candidates))
        pairs = [candidates[i] for i in order[:scenario.flows]]

    if scenario.flow_start_window > 0:
        starts = np.random.default_rng([seed, 3]).uniform(0.0, scenario.flow_start_window, size=len(pairs))
    else:
        starts = np.zeros(len(pairs))
    return [Flow(i, int(a), int(b), scenario.rate, scenario.packet_size, float(starts[i]), scenario.duration)
            for i, (a, b) in enumerate(pairs)]


@dataclass
class _Packet:
    id: int
    flow_id: int
    path: Tuple[int, ...] = ()
    channels: Tuple[int, ...] = ()
    hop: int = 0


@dataclass
class _Interface:
    current: Optional[Tuple[Transmission, _Packet]] = None
    queue: Deque[_Packet] = field(default_factory=deque)


@dataclass
class _FlowRuntime:
    flow: Flow
    metrics: FlowMetrics
    send_times: np.ndarray
    route: Optional[EstablishedRoute] = None
    ready: bool = False
    discovery: Optional[Discovery] = None
    buffer: Deque[_Packet] = field(default_factory=deque)
    active: bool = False


class Simulator:
    """Single-threaded deterministic event loop for one (scenario, seed)."""

    def __init__(self, scenario: Scenario, seed: Optional[int] = None, keep_trace: bool = True):
        scenario.validate()
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else int(seed)
        self.algorithm = scenario.algorithm
        self.topology = scenario.build_topology(self.seed)
        self.flows = build_flows(scenario, self.topology, self.seed)
        self.airtime = scenario.airtime
        self.horizon = scenario.duration
        self.now = 0.0

        self.trace = TraceLog(keep=keep_trace)
        self._write_header()

        self.states: Dict[int, ChannelInfo] = {
            n: ChannelInfo(scenario.channels, q_max=scenario.queue_cap) for n in range(self.topology.node_count)
        }
        self.router = Router(self.topology, self.states, scenario.wait_timeout, scenario.tpre_rule,
                             trace=self._route_trace)
        self.assignment = None
        self._assignment_digest = None
        if self.algorithm == 'static':
            self.assignment = static_assign(self.topology, scenario.channels, scenario.interfaces, self.seed)
            self._assignment_digest = self.assignment.digest()

        jitter_rng = np.random.default_rng([self.seed, 2])
        self.runtime: Dict[int, _FlowRuntime] = {}
        for f in self.flows:
            metrics = FlowMetrics(f.id, f.src, f.dst, f.packet_size, f.start, f.stop)
            self.runtime[f.id] = _FlowRuntime(f, metrics, f.send_times(jitter_rng, scenario.cbr_jitter))

        self.routes: List[EstablishedRoute] = []
        self._events: List[Event] = []
        self._seq = itertools.count()
        self._packet_ids = itertools.count()
        self._ifaces: Dict[Tuple[int, int], _Interface] = {}
        self._on_air: Dict[int, List[Transmission]] = defaultdict(list)
        self._expiry_pending: set = set()
        self._handlers = {
            EventKind.FLOW_START: self._on_flow_start,
            EventKind.FLOW_STOP: self._on_flow_stop,
            EventKind.PACKET_SEND: self._on_packet_send,
            EventKind.PACKET_ARRIVE: self._on_packet_arrive,
            EventKind.CHANNEL_EXPIRE: self._on_channel_expire,
            EventKind.NOTIFY: self._on_notify,
            EventKind.DISCOVERY_TIMEOUT: self._on_discovery_timeout,
            EventKind.DISCOVERY_RETRY: self._on_discovery_retry,
            EventKind.ROUTE_READY: self._on_route_ready,
        }

    def _write_header(self):
        for key, value in self.scenario.to_items():
            self.trace.add_header('param', key, value)
        self.trace.add_header('param', 'run_seed', self.seed)
        for n, (x, y) in enumerate(self.topology.positions):
            self.trace.add_header('node', n, repr(float(x)), repr(float(y)))
        for f in self.flows:
            self.trace.add_header('flow', f.id, f.src, f.dst, f.rate, f.packet_size, repr(f.start), repr(f.stop))
        self.trace.add_header(*TRACE_COLUMNS)

    def _route_trace(self, kind: str, nodes: Sequence[int], channels: Sequence[int], flow: Optional[int], outcome: str):
        self.trace.record(self.now, kind, nodes, channels, flow, outcome)

    def schedule(self, time: float, kind: EventKind, payload: Any = None):
        if time < self.now:
            raise RuntimeError(f"{kind.value} scheduled at {time} before current time {self.now}")
        heapq.heappush(self._events, Event(time, next(self._seq), kind, payload))

    def run(self) -> SimulationResult:
        logger.info("run algorithm=%s seed=%s flows=%d rate=%s", self.algorithm, self.seed,
                    len(self.flows), self.scenario.rate)
        for f in self.flows:
            self.schedule(f.start, EventKind.FLOW_START, f.id)
        while self._events and self._events[0].time <= self.horizon:
            event = heapq.heappop(self._events)
            self.now = event.time
            self._handlers[event.kind](event.payload)
        return self._finish()

    def _finish(self) -> SimulationResult:
        for rt in self.runtime.values():
            rt.metrics.dropped += len(rt.buffer)
            rt.buffer.clear()
        for iface in self._ifaces.values():
            waiting = list(iface.queue) + ([iface.current[1]] if iface.current else [])
            for p in waiting:
                self.runtime[p.flow_id].metrics.in_flight += 1
        if self.assignment is not None and self.assignment.digest() != self._assignment_digest:
            raise RuntimeError("static assignment changed during the run")
        metrics = collect({fid: rt.metrics for fid, rt in self.runtime.items()})
        logger.info("done: sent=%d delivered=%d collided=%d dropped=%d", metrics.sent, metrics.delivered,
                    metrics.collided, metrics.dropped)
        return SimulationResult(metrics, self.trace, self.topology, self.flows, self.routes)

    # -- route establishment -------------------------------------------------

    def _establish(self, rt: _FlowRuntime):
        f = rt.flow
        if self.algorithm == 'rca':
            t_pre = estimate_tpre(f.remaining_packets(self.now), f.packet_size, f.rate, self.now)
            result = self.router.discover_route(f.id, f.src, f.dst, self.now, t_pre)
        else:
            self.trace.record(self.now, 'RREQ', (f.src, f.dst), (), f.id, self.algorithm)
            if self.algorithm == 'static':
                result = static_route(self.assignment, self.topology, f.src, f.dst, f.id, self.now)
            else:
                result = single_radio_route(self.topology, f.src, f.dst, f.id, self.now)
            if isinstance(result, EstablishedRoute):
                result.t_pre = f.stop
                self.trace.record(self.now, 'RREP', result.path, result.channels, f.id, 'ESTABLISHED')
            else:
                self.trace.record(self.now, 'ROUTE_FAIL', (f.src, f.dst), (), f.id, result.reason.value)
        self._apply_result(rt, result)
        self._deliver_notifications()

    def _apply_result(self, rt: _FlowRuntime, result):
        if result is None:
            return
        if isinstance(result, EstablishedRoute):
            rt.route, rt.discovery = result, None
            rt.metrics.route_hops = len(result.channels)
            self.routes.append(result)
            if self.scenario.control_overhead:
                # request out and reply back, one airtime per control hop
                self.schedule(self.now + 2 * len(result.channels) * self.airtime, EventKind.ROUTE_READY, rt.flow.id)
            else:
                self._route_ready(rt)
        elif isinstance(result, Discovery):
            first_wait = rt.discovery is not result
            rt.discovery = result
            if first_wait:
                self.schedule(max(result.deadline, self.now), EventKind.DISCOVERY_TIMEOUT,
                              (rt.flow.id, result.request_id))
            self._schedule_expiry(result.waiting_on[1])
        elif isinstance(result, RouteFailure):
            rt.discovery = None
            if self.algorithm != 'rca' or result.reason is not FailureReason.NO_CHANNEL or not rt.active:
                return
            f = rt.flow
            if self.scenario.rca_fallback == 'shared':
                t_pre = estimate_tpre(f.remaining_packets(self.now), f.packet_size, f.rate, self.now)
                self._apply_result(rt, self.router.shared_route(f.id, f.src, f.dst, self.now, t_pre))
            else:
                retry_at = self.now + self.scenario.retry_interval
                if retry_at < rt.flow.stop:
                    self.schedule(retry_at, EventKind.DISCOVERY_RETRY, rt.flow.id)

    def _route_ready(self, rt: _FlowRuntime):
        rt.ready = True
        while rt.buffer:
            p = rt.buffer.popleft()
            self._inject(rt, p)

    def _schedule_expiry(self, node: int):
        when = self.states[node].next_expiry(self.now)
        if when is not None and (node, when) not in self._expiry_pending:
            self._expiry_pending.add((node, when))
            self.schedule(when, EventKind.CHANNEL_EXPIRE, node)

    def _deliver_notifications(self):
        for notify in self.router.drain_notifications():
            self.schedule(self.now + self.airtime, EventKind.NOTIFY, notify)

    # -- handlers --------------------------------------------------------------

    def _on_flow_start(self, flow_id: int):
        rt = self.runtime[flow_id]
        rt.active = True
        f = rt.flow
        self.trace.record(self.now, EventKind.FLOW_START.value, (f.src, f.dst), (), f.id, f"rate={f.rate:g}")
        self._establish(rt)
        if len(rt.send_times):
            self.schedule(float(rt.send_times[0]), EventKind.PACKET_SEND, (flow_id, 0))
        self.schedule(f.stop, EventKind.FLOW_STOP, flow_id)

    def _on_flow_stop(self, flow_id: int):
        rt = self.runtime[flow_id]
        rt.active = False
        f = rt.flow
        self.trace.record(self.now, EventKind.FLOW_STOP.value, (f.src, f.dst), (), f.id, '-')
        if rt.discovery is not None:
            self.router.abort(rt.discovery, self.now)
            rt.discovery = None
        if rt.route is not None and not rt.route.torn_down:
            if self.algorithm == 'rca':
                self.router.teardown(rt.route, self.now)
            else:
                rt.route.torn_down = True
                self.trace.record(self.now, 'ROUTE_DOWN', rt.route.path, rt.route.channels, f.id, 'released')
        rt.metrics.dropped += len(rt.buffer)
        rt.buffer.clear()
        self._deliver_notifications()

    def _on_packet_send(self, payload: Tuple[int, int]):
        flow_id, k = payload
        rt = self.runtime[flow_id]
        rt.metrics.sent += 1
        p = _Packet(next(self._packet_ids), flow_id)
        if rt.route is not None and rt.ready and not rt.route.torn_down:
            self.trace.record(self.now, EventKind.PACKET_SEND.value, (rt.flow.src,), (), flow_id, 'injected')
            self._inject(rt, p)
        elif len(rt.buffer) < self.scenario.buffer_cap:
            self.trace.record(self.now, EventKind.PACKET_SEND.value, (rt.flow.src,), (), flow_id, 'buffered')
            rt.buffer.append(p)
        else:
            self.trace.record(self.now, EventKind.PACKET_SEND.value, (rt.flow.src,), (), flow_id, 'dropped')
            rt.metrics.dropped += 1
        if k + 1 < len(rt.send_times):
            self.schedule(float(rt.send_times[k + 1]), EventKind.PACKET_SEND, (flow_id, k + 1))

    def _inject(self, rt: _FlowRuntime, p: _Packet):
        p.path, p.channels, p.hop = rt.route.path, rt.route.channels, 0
        self._enqueue(p.path[0], p)

    def _enqueue(self, node: int, p: _Packet):
        ch = p.channels[p.hop]
        iface = self._ifaces.setdefault((node, ch), _Interface())
        if iface.current is None:
            self._transmit(node, ch, iface, p)
        elif len(iface.queue) < self.scenario.buffer_cap:
            iface.queue.append(p)
        else:
            self.runtime[p.flow_id].metrics.dropped += 1
            self.trace.record(self.now, 'PACKET_DROP', (node,), (ch,), p.flow_id, 'buffer_full')

    def _transmit(self, node: int, ch: int, iface: _Interface, p: _Packet):
        tx = Transmission(node, p.path[p.hop + 1], ch, self.now, self.now + self.airtime, p.flow_id, p.id)
        iface.current = (tx, p)
        self._on_air[ch].append(tx)
        self.schedule(tx.end, EventKind.PACKET_ARRIVE, (node, ch))

    def _on_packet_arrive(self, key: Tuple[int, int]):
        node, ch = key
        iface = self._ifaces[key]
        tx, p = iface.current
        iface.current = None

        air = self._on_air[ch]
        overlapping = [o for o in air if o is not tx and o.overlaps(tx)]
        outcome = resolve_transmission([tx] + overlapping, self.topology)[0]
        self.trace.record(self.now, EventKind.PACKET_ARRIVE.value, (tx.tx, tx.rx), (ch,), p.flow_id, outcome.value)

        metrics = self.runtime[p.flow_id].metrics
        if outcome is Outcome.COLLIDED:
            metrics.collided += 1
        else:
            p.hop += 1
            if p.hop == len(p.channels):
                metrics.delivered += 1
            else:
                self._enqueue(tx.rx, p)

        if iface.queue:
            self._transmit(node, ch, iface, iface.queue.popleft())
        cutoff = self.now - self.airtime
        self._on_air[ch] = [o for o in air if o.end > cutoff]

    def _on_channel_expire(self, node: int):
        self._expiry_pending = {(n, t) for n, t in self._expiry_pending if not (n == node and t <= self.now)}
        notifies = self.router.expire(node, self.now)
        self.trace.record(self.now, EventKind.CHANNEL_EXPIRE.value, (node,),
                          tuple(n.freed_channel for n in notifies), None, f"notified={len(notifies)}")
        self._deliver_notifications()
        if self.states[node].waiting_queue:
            self._schedule_expiry(node)

    def _on_notify(self, notify):
        d = self.router.find_waiting(notify)
        rt = self.runtime.get(d.flow_id) if d is not None else None
        # blocks granted so far lapse at the deadline; the pending timeout aborts it
        if d is None or rt is None or rt.discovery is not d or not rt.active or self.now >= d.deadline:
            self.trace.record(self.now, EventKind.NOTIFY.value, (notify.waited_node, notify.waiter),
                              (notify.freed_channel,), None, 'stale')
            return
        result = self.router.resume_waiting(d, notify, self.now)
        self._apply_result(rt, result)
        self._deliver_notifications()

    def _on_discovery_timeout(self, payload: Tuple[int, int]):
        flow_id, request_id = payload
        rt = self.runtime[flow_id]
        d = rt.discovery
        if d is None or d.request_id != request_id or d.status is not DiscoveryStatus.WAITING:
            return
        self.trace.record(self.now, EventKind.DISCOVERY_TIMEOUT.value, (d.src, d.dst), (), flow_id,
                          f"request_id={request_id}")
        result = self.router.abort(d, self.now)
        self._apply_result(rt, result)
        self._deliver_notifications()

    def _on_discovery_retry(self, flow_id: int):
        rt = self.runtime[flow_id]
        if not rt.active or rt.route is not None or rt.discovery is not None:
            return
        self.trace.record(self.now, EventKind.DISCOVERY_RETRY.value, (rt.flow.src, rt.flow.dst), (), flow_id, '-')
        self._establish(rt)

    def _on_route_ready(self, flow_id: int):
        rt = self.runtime[flow_id]
        if rt.route is not None and not rt.route.torn_down:
            self.trace.record(self.now, EventKind.ROUTE_READY.value, rt.route.path, rt.route.channels, flow_id, '-')
            self._route_ready(rt)


def run(scenario: Scenario, seed: Optional[int] = None, keep_trace: bool = True) -> SimulationResult:
    """Simulate one scenario; equal (scenario, seed) give identical metrics and trace digests."""
    return Simulator(scenario, seed, keep_trace).run()
