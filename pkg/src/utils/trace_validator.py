"""
Simulation Trace Validation
Reloads a recorded trace, rebuilds its topology from the header and re-checks
the run invariants: ordering, per-flow counts, waiting-queue capacity, R-CA
route soundness and recorded collision outcomes. Can also replay the scenario
and compare trace digests.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from src.mesh.routing import SHARED_OUTCOME
from src.mesh.scenario import ConfigError, Scenario, parse_scenario_text
from src.mesh.simkernel import TRACE_COLUMNS, Flow, Outcome, Transmission, resolve_transmission, run
from src.mesh.topology import Topology

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-7

##command


@dataclass
class TraceRecord:
    scenario: Scenario
    seed: int
    topology: Topology
    flows: List[Flow]
    events: pd.DataFrame
    digest: str = ''


def _split_ints(text: str) -> Tuple[int, ...]:
    return () if text in ('', '-') else tuple(int(x) for x in text.split(','))


def load_trace(path: Union[str, Path]) -> TraceRecord:
    """Parse a trace file written by TraceLog.write."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("trace file not found", path)
    text = path.read_text(encoding='utf8')

    params, positions, flows, seed = [], [], [], None
    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        fields = line.split('\t')[1:]
        if not fields:
            continue
        if fields[0] == 'param' and len(fields) >= 2:
            key, value = fields[1], fields[2] if len(fields) > 2 else ''
            if key == 'run_seed':
                seed = int(value)
            else:
                params.append(f"{key} = {value}")
        elif fields[0] == 'node':
            positions.append((float(fields[2]), float(fields[3])))
        elif fields[0] == 'flow':
            fid, src, dst, rate, size, start, stop = fields[1:8]
            flows.append(Flow(int(fid), int(src), int(dst), float(rate), int(size), float(start), float(stop)))

    if not params or seed is None:
        raise ConfigError("trace header lacks scenario parameters", path)
    scenario = parse_scenario_text('\n'.join(params), path)
    topology = Topology(np.array(positions, dtype=float).reshape(-1, 2), interfaces=scenario.interfaces,
                        channels=scenario.channels, reception_range=scenario.reception_range,
                        area=(scenario.area_x, scenario.area_y), interference_model=scenario.interference_model)

    body = [line.split('\t') for line in text.splitlines() if line and not line.startswith('#')]
    short = next((i for i, fields in enumerate(body) if len(fields) != len(TRACE_COLUMNS)), None)
    if short is not None:
        raise ConfigError(f"trace event {short} has {len(body[short])} fields, expected {len(TRACE_COLUMNS)}", path)
    events = pd.DataFrame(body, columns=list(TRACE_COLUMNS))
    try:
        events['time'] = events['time'].astype(float)
        events['sequence'] = events['sequence'].astype(int)
    except ValueError as exc:
        raise ConfigError(f"malformed trace body: {exc}", path) from exc
    digest = hashlib.sha256(text.encode('utf8')).hexdigest()
    return TraceRecord(scenario, seed, topology, flows, events, digest)


@dataclass
class _LiveRoute:
    flow: int
    hops: List[Tuple[int, int, int]] = field(default_factory=list)


class TraceValidator:
    """
    Re-checks a TraceRecord. Each check appends readable strings to its issue
    list; ``validate`` returns every list and an overall pass flag.
    """

    def __init__(self, record: TraceRecord):
        self.record = record
        self.scenario = record.scenario
        self.topology = record.topology
        self.events = record.events

    def check_ordering(self) -> List[str]:
        issues = []
        times = self.events['time'].to_numpy()
        if len(times) and (np.diff(times) < 0).any():
            at = int(np.flatnonzero(np.diff(times) < 0)[0]) + 1
            issues.append(f"time decreases at sequence {self.events['sequence'].iloc[at]}")
        seq = self.events['sequence'].to_numpy()
        if not np.array_equal(seq, np.arange(len(seq))):
            issues.append("sequence numbers are not 0..n-1 in order")
        return issues

    def check_flow_counts(self) -> List[str]:
        issues = []
        sends = self.events[self.events['kind'] == 'PACKET_SEND']
        arrivals = self.events[(self.events['kind'] == 'PACKET_ARRIVE') & (self.events['outcome'] == Outcome.DELIVERED.value)]
        for f in self.record.flows:
            sent = int((sends['flow'] == str(f.id)).sum())
            mine = arrivals[arrivals['flow'] == str(f.id)]
            delivered = int(sum(1 for nodes in mine['nodes'] if _split_ints(nodes)[-1] == f.dst))
            if sent > f.packet_count:
                issues.append(f"flow {f.id}: {sent} sends exceed the CBR count {f.packet_count}")
            if delivered > sent:
                issues.append(f"flow {f.id}: delivered {delivered} > sent {sent}")
        return issues

    def check_queue_caps(self) -> List[str]:
        issues = []
        waits = self.events[self.events['outcome'].str.startswith('WAIT')]
        for _, row in waits.iterrows():
            q, q_max = (int(x) for x in row['outcome'].split('=', 1)[1].split('/'))
            if q > q_max or q_max != self.scenario.queue_cap:
                issues.append(f"sequence {row['sequence']}: waiting queue {q}/{q_max} (cap {self.scenario.queue_cap})")
        return issues

    def check_route_soundness(self) -> List[str]:
        """
        Every negotiated R-CA route must be interference-free against itself and
        all negotiated routes live when it was set up. Shared (best-effort)
        routes only have to run over links.
        """
        if self.scenario.algorithm != 'rca':
            return []
        issues = []
        live: Dict[int, _LiveRoute] = {}
        for _, row in self.events[self.events['kind'].isin(['RREP', 'ROUTE_DOWN'])].iterrows():
            flow = int(row['flow'])
            if row['kind'] == 'ROUTE_DOWN':
                live.pop(flow, None)
                continue
            path, channels = _split_ints(row['nodes']), _split_ints(row['channel'])
            hops = [(path[i], path[i + 1], channels[i]) for i in range(len(channels))]
            for u, v, ch in hops:
                if v not in self.topology.neighbors(u):
                    issues.append(f"flow {flow}: hop {u}->{v} is not a link")
            if row['outcome'] == SHARED_OUTCOME:
                continue
            existing = [h for r in live.values() for h in r.hops]
            for i, a in enumerate(hops):
                for b in hops[i + 1:] + existing:
                    if self.topology.interferes(a[0], a[1], a[2], b[0], b[1], b[2]):
                        issues.append(f"flow {flow} at t={row['time']:.6f}: hop {a} interferes with {b}")
            live[flow] = _LiveRoute(flow, hops)
        return issues

    def check_collisions(self) -> List[str]:
        """Recompute COLLIDED/DELIVERED for arrivals whose overlap window lies fully inside the trace."""
        issues = []
        airtime = self.scenario.airtime
        arrivals = self.events[self.events['kind'] == 'PACKET_ARRIVE']
        by_channel: Dict[int, List[Tuple[Transmission, str, int]]] = {}
        for _, row in arrivals.iterrows():
            tx, rx = _split_ints(row['nodes'])
            ch = _split_ints(row['channel'])[0]
            end = row['time']
            t = Transmission(tx, rx, ch, end - airtime, end)
            by_channel.setdefault(ch, []).append((t, row['outcome'], row['sequence']))

        cutoff = self.scenario.duration - airtime
        for ch, items in by_channel.items():
            items.sort(key=lambda it: it[0].start)
            starts = np.array([it[0].start for it in items])
            for t, recorded, seq in items:
                if t.end > cutoff:
                    continue
                lo = int(np.searchsorted(starts, t.start - airtime - TIME_TOLERANCE, side='left'))
                hi = int(np.searchsorted(starts, t.end + TIME_TOLERANCE, side='right'))
                shared = [(min(o.end, t.end) - max(o.start, t.start), o)
                          for o, _, _ in items[lo:hi] if o is not t
                          and self.topology.interferes(t.tx, t.rx, t.channel, o.tx, o.rx, o.channel)]
                # times are printed to 1e-9; back-to-back frames are indistinguishable from tiny overlaps
                if any(abs(span) <= TIME_TOLERANCE for span, _ in shared):
                    continue
                window = [o for span, o in shared if span > 0]
                expected = resolve_transmission([t] + window, self.topology)[0]
                if expected.value != recorded:
                    issues.append(f"sequence {seq}: recorded {recorded}, recomputed {expected.value}")
        return issues

    def validate(self) -> Dict[str, object]:
        results = {
            'ordering_issues': self.check_ordering(),
            'flow_issues': self.check_flow_counts(),
            'queue_issues': self.check_queue_caps(),
            'route_issues': self.check_route_soundness(),
            'collision_issues': self.check_collisions(),
        }
        results['passed'] = not any(results[k] for k in list(results))
        return results


def replay_digest_matches(record: TraceRecord) -> bool:
    """Re-run the recorded scenario and compare the full trace digest."""
    result = run(record.scenario, record.seed, keep_trace=False)
    return result.trace.digest() == record.digest


def validate_trace(path: Union[str, Path], rerun: bool = False) -> Dict[str, object]:
    record = load_trace(path)
    results = TraceValidator(record).validate()
    if rerun:
        same = replay_digest_matches(record)
        results['replay_issues'] = [] if same else ["re-running the scenario produced a different trace"]
        results['passed'] = results['passed'] and same
    logger.info("trace %s: %s", path, 'PASS' if results['passed'] else 'FAIL')
    return results
