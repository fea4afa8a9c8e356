"""Tests for src/utils/trace_validator.py"""
from __future__ import annotations

import pandas as pd
import pytest

from src.mesh.scenario import ConfigError, Scenario
from src.mesh.simkernel import TRACE_COLUMNS, run
from src.mesh.topology import line_topology
from src.utils.trace_validator import (
    TraceRecord,
    TraceValidator,
    load_trace,
    replay_digest_matches,
    validate_trace,
)

TWO_NODES = Scenario(nodes=2, area_x=300.0, area_y=300.0, placement='grid', channels=3, interfaces=3,
                     flows=1, rate=5.0, duration=4.0, flow_endpoint_policy='fixed_list',
                     flow_list=((0, 1),), flow_start_window=0.0)
MESH = Scenario(nodes=12, area_x=600.0, area_y=600.0, flows=3, rate=10.0, duration=5.0, seed=2)


def write_trace(tmp_path, scenario, name='run.trace'):
    path = tmp_path / name
    run(scenario).trace.write(path)
    return path


def rewrite_body(path, edit):
    lines = path.read_text().splitlines()
    body = [i for i, line in enumerate(lines) if not line.startswith('#')]
    edit(lines, body)
    path.write_text('\n'.join(lines) + '\n')


def test_load_trace_rebuilds_the_run(tmp_path):
    path = write_trace(tmp_path, MESH)
    record = load_trace(path)
    assert record.scenario == MESH.validate()
    assert record.seed == 2
    original = run(MESH)
    assert (record.topology.positions == original.topology.positions).all()
    assert record.flows == original.flows
    assert list(record.events.columns) == list(TRACE_COLUMNS)
    assert len(record.events) == len(original.trace.lines)
    assert record.digest == original.trace.digest()


@pytest.mark.parametrize("algorithm", ['rca', 'static', 'single'])
def test_recorded_runs_validate(tmp_path, algorithm):
    path = write_trace(tmp_path, MESH.replace(algorithm=algorithm))
    results = validate_trace(path, rerun=True)
    assert results['passed'], results


def test_flipped_outcome_is_caught(tmp_path):
    path = write_trace(tmp_path, TWO_NODES)

    def flip(lines, body):
        i = next(i for i in body if '\tPACKET_ARRIVE\t' in lines[i])
        lines[i] = lines[i].replace('DELIVERED', 'COLLIDED')

    rewrite_body(path, flip)
    results = validate_trace(path)
    assert not results['passed']
    assert len(results['collision_issues']) == 1
    assert not replay_digest_matches(load_trace(path))


def test_swapped_times_are_caught(tmp_path):
    path = write_trace(tmp_path, TWO_NODES)

    def swap(lines, body):
        i = next(k for k in range(len(body) - 1)
                 if lines[body[k]].split('\t')[0] != lines[body[k + 1]].split('\t')[0])
        a, b = lines[body[i]].split('\t'), lines[body[i + 1]].split('\t')
        a[0], b[0] = b[0], a[0]
        lines[body[i]], lines[body[i + 1]] = '\t'.join(a), '\t'.join(b)

    rewrite_body(path, swap)
    issues = validate_trace(path)['ordering_issues']
    assert issues and 'time decreases' in issues[0]


def test_missing_header_is_a_config_error(tmp_path):
    path = tmp_path / 'bare.trace'
    path.write_text('0.000000000\t0\tFLOW_START\t0,1\t-\t0\trate=5\n')
    with pytest.raises(ConfigError):
        load_trace(path)
    with pytest.raises(ConfigError):
        load_trace(tmp_path / 'absent.trace')


def synthetic(rows, queue_cap=10) -> TraceValidator:
    scenario = Scenario(nodes=4, channels=3, interfaces=3, flows=0, queue_cap=queue_cap).validate()
    events = pd.DataFrame(
        [(float(t), i, kind, nodes, ch, flow, outcome) for i, (t, kind, nodes, ch, flow, outcome) in enumerate(rows)],
        columns=list(TRACE_COLUMNS))
    topo = line_topology(4, 200.0, channels=3, interfaces=3)
    return TraceValidator(TraceRecord(scenario, 0, topo, [], events))


def test_interfering_routes_are_reported():
    v = synthetic([
        (0.0, 'RREP', '0,1', '1', '0', 'ESTABLISHED'),
        (1.0, 'RREP', '2,3', '1', '1', 'ESTABLISHED'),
    ])
    issues = v.check_route_soundness()
    assert len(issues) == 1 and 'flow 1' in issues[0]


def test_torn_down_routes_stop_counting():
    v = synthetic([
        (0.0, 'RREP', '0,1', '1', '0', 'ESTABLISHED'),
        (0.5, 'ROUTE_DOWN', '0,1', '1', '0', 'released'),
        (1.0, 'RREP', '2,3', '1', '1', 'ESTABLISHED'),
        (2.0, 'RREP', '0,1,2', '1,1', '2', 'ESTABLISHED'),
    ])
    issues = v.check_route_soundness()
    # flow 2 conflicts with itself and with the live flow 1, never with the torn-down flow 0
    assert issues and all(i.startswith('flow 2') for i in issues)


def test_non_link_hop_is_reported():
    v = synthetic([(0.0, 'RREP', '0,3', '2', '0', 'ESTABLISHED')])
    assert any('is not a link' in i for i in v.check_route_soundness())


def test_queue_overflow_is_reported():
    v = synthetic([
        (0.0, 'RCA_REQUEST', '0,1', '1', '0', 'WAIT queue=3/10'),
        (0.1, 'RCA_REQUEST', '2,1', '1', '1', 'WAIT queue=11/10'),
    ])
    issues = v.check_queue_caps()
    assert len(issues) == 1 and 'sequence 1' in issues[0]


def test_malformed_body_is_a_config_error(tmp_path):
    path = write_trace(tmp_path, TWO_NODES)
    rewrite_body(path, lambda lines, body: lines.__setitem__(body[0], lines[body[0]] + '\textra'))
    with pytest.raises(ConfigError, match='fields'):
        load_trace(path)

    path = write_trace(tmp_path, TWO_NODES, 'again.trace')
    rewrite_body(path, lambda lines, body: lines.__setitem__(body[1], 'later' + lines[body[1]][lines[body[1]].index('\t'):]))
    with pytest.raises(ConfigError, match='malformed'):
        load_trace(path)


def test_channel_column_feeds_soundness(tmp_path):
    path = write_trace(tmp_path, MESH)
    record = load_trace(path)
    rrep = record.events[record.events['kind'] == 'RREP']
    assert len(rrep) > 0
    assert TraceValidator(record).check_route_soundness() == []


def test_shared_routes_skip_the_interference_check():
    v = synthetic([
        (0.0, 'RREP', '0,1', '1', '0', 'ESTABLISHED'),
        (1.0, 'RREP', '2,3', '1', '1', 'SHARED'),
        (2.0, 'RREP', '1,3', '2', '2', 'SHARED'),
    ])
    issues = v.check_route_soundness()
    assert len(issues) == 1 and 'flow 2' in issues[0] and 'is not a link' in issues[0]


def test_negotiated_route_ignores_live_shared_routes():
    v = synthetic([
        (0.0, 'RREP', '0,1', '1', '0', 'SHARED'),
        (1.0, 'RREP', '2,3', '1', '1', 'ESTABLISHED'),
    ])
    assert v.check_route_soundness() == []


def test_runs_with_shared_routes_validate(tmp_path):
    diamond = Scenario(nodes=4, area_x=400.0, area_y=400.0, placement='grid', channels=2, interfaces=1,
                       flows=1, rate=10.0, duration=5.0, flow_endpoint_policy='fixed_list',
                       flow_list=((0, 3),), flow_start_window=0.0)
    path = write_trace(tmp_path, diamond)
    assert 'SHARED' in set(load_trace(path).events['outcome'])
    results = validate_trace(path, rerun=True)
    assert results['passed'], results
