"""Tests for src/mesh/scenario.py"""
from __future__ import annotations

from pathlib import Path

import pytest

from src.mesh.scenario import (
    ConfigError,
    ExperimentMatrix,
    Scenario,
    format_scenario,
    load_matrix,
    parse_scenario,
    parse_scenario_text,
)

SCENARIOS = Path(__file__).resolve().parents[1] / 'data' / 'scenarios'


def test_empty_file_gives_defaults():
    scn = parse_scenario_text('')
    assert scn == Scenario()
    assert (scn.nodes, scn.channels, scn.interfaces) == (30, 4, 4)
    assert (scn.rate, scn.packet_size, scn.duration, scn.queue_cap) == (20.0, 512, 50.0, 10)
    assert scn.airtime == pytest.approx(512 * 8 / 2e6)


def test_comments_and_blank_lines():
    scn = parse_scenario_text("# header\n\nflows = 6   # six of them\nrate=12.5\n")
    assert scn.flows == 6 and scn.rate == 12.5


def test_fewer_channels_than_interfaces_is_rejected_with_line():
    with pytest.raises(ConfigError) as err:
        parse_scenario_text("nodes = 30\nchannels = 3\ninterfaces = 4\n", 'bad.cfg')
    assert 'C >= K' in str(err.value)
    assert err.value.line == 2
    assert str(err.value).startswith('bad.cfg:2:')


@pytest.mark.parametrize("text,line", [
    ("flows = 2\nbogus = 1\n", 2),
    ("flows = 2\nflows = 3\n", 2),
    ("just words\n", 1),
    ("rate = fast\n", 1),
    ("channels = 1\n", 1),
    ("algorithm = aodv\n", 1),
    ("flow_start_window = 60\n", 1),
    ("control_overhead = maybe\n", 1),
    ("flows = 2\nrca_fallback = drop\n", 2),
])
def test_malformed_files(text, line):
    with pytest.raises(ConfigError) as err:
        parse_scenario_text(text)
    assert err.value.line == line


def test_fixed_list_needs_enough_valid_pairs():
    with pytest.raises(ConfigError):
        parse_scenario_text("flows = 2\nflow_endpoint_policy = fixed_list\nflow_list = 0>1\n")
    with pytest.raises(ConfigError):
        parse_scenario_text("flows = 1\nflow_endpoint_policy = fixed_list\nflow_list = 3>3\n")
    scn = parse_scenario_text("flows = 2\nflow_endpoint_policy = fixed_list\nflow_list = 0>1, 5>2\n")
    assert scn.flow_list == ((0, 1), (5, 2))


def test_format_then_parse_reproduces_scenario():
    scn = Scenario(flows=7, rate=12.5, topology_seed=3, flow_endpoint_policy='fixed_list',
                   flow_list=tuple((i, i + 1) for i in range(7)), control_overhead=True).validate()
    assert parse_scenario_text(format_scenario(scn)) == scn


def test_shipped_scenarios_parse():
    assert parse_scenario(SCENARIOS / 'default.cfg') == Scenario()
    assert parse_scenario(SCENARIOS / 'heavy_load.cfg').flows == 10
    single = parse_scenario(SCENARIOS / 'single_flow.cfg')
    assert (single.channels, single.flows, single.flow_start_window) == (3, 1, 0.0)


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_scenario('does/not/exist.cfg')


def test_grid_placement_is_deterministic():
    topo = Scenario(nodes=9, placement='grid', area_x=600.0, area_y=600.0).validate().build_topology()
    assert topo.positions[0].tolist() == [100.0, 100.0]
    assert topo.positions[8].tolist() == [500.0, 500.0]


def test_topology_seed_overrides_run_seed():
    scn = Scenario(topology_seed=5).validate()
    assert (scn.build_topology(seed=1).positions == scn.build_topology(seed=2).positions).all()
    free = Scenario().validate()
    assert not (free.build_topology(seed=1).positions == free.build_topology(seed=2).positions).all()


def test_load_matrix_with_inline_base(tmp_path):
    path = tmp_path / 'm.yaml'
    path.write_text("base:\n  flows: 2\n  duration: 5\nsweep_key: rate\nsweep_values: [5, 10]\n"
                    "algorithms: [static, rca]\nseeds: 3\n")
    matrix = load_matrix(path)
    assert matrix.base.flows == 2 and matrix.seeds == (0, 1, 2)
    cells = matrix.cells()
    assert len(cells) == 12
    assert cells[0] == ('rca', 5, 0) and cells[-1] == ('static', 10, 2)
    scn = matrix.scenario_for('static', 10, 2)
    assert (scn.algorithm, scn.rate, scn.seed) == ('static', 10.0, 2)


def test_load_matrix_with_base_file():
    matrix = load_matrix(SCENARIOS / 'rate_sweep.yaml')
    assert matrix.base == Scenario()
    assert matrix.sweep_values == (5, 10, 15, 20, 25)
    assert matrix.seeds == tuple(range(10))
    assert matrix.workers == 4


@pytest.mark.parametrize("body", [
    "sweep_key: speed\nsweep_values: [1]\n",
    "sweep_key: rate\nsweep_values: []\n",
    "sweep_key: rate\nsweep_values: [5]\nalgorithms: [aodv]\n",
    "sweep_key: rate\nsweep_values: [5]\ncolour: blue\n",
    "base:\n  channels: 2\n  interfaces: 3\nsweep_key: rate\nsweep_values: [5]\n",
    "[not, a, mapping]\n",
])
def test_bad_matrices(tmp_path, body):
    path = tmp_path / 'm.yaml'
    path.write_text(body)
    with pytest.raises(ConfigError):
        load_matrix(path)


def test_matrix_rejects_zero_workers():
    with pytest.raises(ConfigError):
        ExperimentMatrix(Scenario(), 'rate', (5,), workers=0)


def test_rca_fallback_defaults_to_shared():
    assert parse_scenario_text('').rca_fallback == 'shared'
    assert parse_scenario_text("rca_fallback = none\n").rca_fallback == 'none'
