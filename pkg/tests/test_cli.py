"""Exit codes and outputs of scripts/cli.py, called in-process through main()."""
from __future__ import annotations

import importlib.util
from pathlib import Path

import pandas as pd
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = REPO_ROOT / 'data' / 'scenarios'


def load_script(name: str):
    spec = importlib.util.spec_from_file_location(name, REPO_ROOT / 'scripts' / f"{name}.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture(scope='module')
def cli():
    return load_script('cli')


def small_cfg(tmp_path, extra: str = '') -> Path:
    path = tmp_path / 'small.cfg'
    path.write_text("nodes = 12\narea_x = 600\narea_y = 600\nflows = 2\nduration = 5\n" + extra)
    return path


def test_validate_ok_and_show(cli, capsys):
    assert cli.main(['validate', '--scenario', str(SCENARIOS / 'default.cfg'), '--show']) == 0
    out = capsys.readouterr().out
    assert 'OK' in out and 'wait_timeout = 2.0' in out


def test_validate_bad_scenario(cli, tmp_path, capsys):
    bad = tmp_path / 'bad.cfg'
    bad.write_text("channels = 3\ninterfaces = 4\n")
    assert cli.main(['validate', '--scenario', str(bad)]) == 1
    assert 'C >= K' in capsys.readouterr().out
    assert cli.main(['validate', '--scenario', str(tmp_path / 'missing.cfg')]) == 1


def test_run_writes_trace_and_metrics(cli, tmp_path):
    trace, metrics = tmp_path / 'out' / 'run.trace', tmp_path / 'out' / 'flows.csv'
    code = cli.main(['run', '--scenario', str(small_cfg(tmp_path)), '--seed', '3',
                     '--trace', str(trace), '--metrics', str(metrics)])
    assert code == 0
    assert trace.read_text().startswith('#\tparam\t')
    assert len(pd.read_csv(metrics)) == 2
    assert cli.main(['replay', '--trace', str(trace), '--rerun']) == 0


def test_replay_reports_tampering(cli, tmp_path, capsys):
    trace = tmp_path / 'run.trace'
    assert cli.main(['run', '--scenario', str(small_cfg(tmp_path)), '--trace', str(trace)]) == 0
    lines = trace.read_text().splitlines()
    body = [i for i, line in enumerate(lines) if not line.startswith('#')]
    lines[body[0]], lines[body[-1]] = lines[body[-1]], lines[body[0]]
    trace.write_text('\n'.join(lines) + '\n')
    assert cli.main(['replay', '--trace', str(trace)]) == 2
    assert 'FAIL' in capsys.readouterr().out


def test_matrix_command(cli, tmp_path):
    out = tmp_path / 'smoke.csv'
    assert cli.main(['matrix', '--config', str(SCENARIOS / 'smoke_matrix.yaml'),
                     '--out', str(out)]) == 0
    assert len(pd.read_csv(out)) == 1
    assert (tmp_path / 'smoke_summary.csv').exists()
    assert (tmp_path / 'smoke_manifest.yaml').exists()


def test_matrix_bad_config(cli, tmp_path):
    cfg = tmp_path / 'bad.yaml'
    cfg.write_text("sweep_key: speed\nsweep_values: [1]\n")
    assert cli.main(['matrix', '--config', str(cfg), '--out', str(tmp_path / 'x.csv')]) == 1


def test_matrix_cell_failure_exits_two(cli, tmp_path, monkeypatch):
    def broken(matrix, output, progress=False):
        raise cli.MatrixCellError('rca', 10, 0, RuntimeError('conservation'))

    monkeypatch.setattr(cli, 'run_matrix', broken)
    code = cli.main(['matrix', '--config', str(SCENARIOS / 'smoke_matrix.yaml'), '--out', str(tmp_path / 'x.csv')])
    assert code == 2


def test_no_command_prints_help(cli):
    assert cli.main([]) == 2


def test_onepager_renders_matrix_results(cli, tmp_path):
    out = tmp_path / 'smoke.csv'
    cli.main(['matrix', '--config', str(SCENARIOS / 'smoke_matrix.yaml'), '--out', str(out)])
    onepager = load_script('generate_results_onepager')
    assert onepager.find_result_files(tmp_path) == [out]
    text = onepager.format_onepager([out], tmp_path)
    assert '## smoke (sweep: rate)' in text
    assert 'hashes match' in text
    assert onepager.main(['--results-dir', str(tmp_path / 'empty')]) == 1


@pytest.mark.parametrize("damage", ['drop_field', 'bad_time'])
def test_replay_malformed_body_exits_one(cli, tmp_path, capsys, damage):
    trace = tmp_path / 'run.trace'
    assert cli.main(['run', '--scenario', str(small_cfg(tmp_path)), '--trace', str(trace)]) == 0
    lines = trace.read_text().splitlines()
    i = next(i for i, line in enumerate(lines) if not line.startswith('#'))
    fields = lines[i].split('\t')
    lines[i] = '\t'.join(fields[:-1] if damage == 'drop_field' else ['soon'] + fields[1:])
    trace.write_text('\n'.join(lines) + '\n')
    assert cli.main(['replay', '--trace', str(trace)]) == 1
    assert 'Traceback' not in capsys.readouterr().out


def test_index_error_while_reading_exits_one(cli, tmp_path, monkeypatch):
    def broken(path, rerun=False):
        raise IndexError('event row too short')

    monkeypatch.setattr(cli, 'validate_trace', broken)
    assert cli.main(['replay', '--trace', str(tmp_path / 'any.trace')]) == 1


def test_runtime_error_exits_two(cli, monkeypatch):
    def broken(scenario, seed=None, keep_trace=True):
        raise RuntimeError('packet conservation')

    monkeypatch.setattr(cli, 'run', broken)
    assert cli.main(['run', '--scenario', str(SCENARIOS / 'default.cfg')]) == 2
