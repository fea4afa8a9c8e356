#!/usr/bin/env python3
"""Central CLI for the mesh channel-assignment simulator.

Runs single scenarios, experiment matrices and trace replays from one place;
repository scripts (tests, one-pager) are invoked with the same interpreter.

Usage examples:
  python scripts/cli.py run --scenario data/scenarios/default.cfg --seed 3 --trace results/run.trace
  python scripts/cli.py matrix --config data/scenarios/rate_sweep.yaml --out results/rate_sweep.csv
  python scripts/cli.py validate --scenario data/scenarios/default.cfg
  python scripts/cli.py replay --trace results/run.trace --rerun
  python scripts/cli.py generate-onepager
  python scripts/cli.py run-tests

Exit codes: 0 success, 1 configuration or malformed input, 2 invariant violation.
"""
from __future__ import annotations
import argparse
import logging
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
SCRIPTS_DIR = REPO_ROOT / 'scripts'
sys.path.insert(0, str(REPO_ROOT))

from src.mesh.experiments import MatrixCellError, run_matrix, summary_path  # noqa: E402
from src.mesh.scenario import ConfigError, format_scenario, load_matrix, parse_scenario  # noqa: E402
from src.mesh.simkernel import run  # noqa: E402
from src.utils.trace_validator import validate_trace  # noqa: E402

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2


def run_script(script_name: str, extra_args: list[str] | None = None) -> int:
    script_path = SCRIPTS_DIR / script_name
    if not script_path.exists():
        print(f"Script not found: {script_path}")
        return 2
    cmd = [sys.executable, str(script_path)]
    if extra_args:
        cmd += extra_args
    print(f"Running: {' '.join(cmd)}")
    proc = subprocess.run(cmd)
    return proc.returncode


def cmd_run(ns: argparse.Namespace) -> int:
    scenario = parse_scenario(ns.scenario)
    result = run(scenario, ns.seed, keep_trace=ns.trace is not None)
    m = result.metrics
    print(f"Scenario {ns.scenario} | algorithm={scenario.algorithm} seed={ns.seed if ns.seed is not None else scenario.seed}")
    print(m.to_frame().to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    print(f"delivery_rate={m.delivery_rate:.4f} throughput_kbps={m.throughput_kbps:.4f} "
          f"sent={m.sent} delivered={m.delivered} collided={m.collided} dropped={m.dropped}")
    if ns.metrics:
        out = Path(ns.metrics)
        out.parent.mkdir(parents=True, exist_ok=True)
        m.to_frame().to_csv(out, index=False, float_format='%.6f', lineterminator='\n')
        print(f"Wrote per-flow metrics to: {out}")
    if ns.trace:
        result.trace.write(ns.trace)
        print(f"Wrote trace ({result.trace.count} events, sha256 {result.trace.digest()[:12]}) to: {ns.trace}")
    return EXIT_OK


def cmd_matrix(ns: argparse.Namespace) -> int:
    matrix = load_matrix(ns.config)
    cells = len(matrix.cells())
    print(f"Matrix {ns.config}: sweep {matrix.sweep_key} over {list(matrix.sweep_values)}, "
          f"{len(matrix.algorithms)} algorithm(s), {len(matrix.seeds)} seed(s) -> {cells} cells")
    out = run_matrix(matrix, ns.out, progress=ns.progress)
    print(f"Wrote {cells} rows to: {out}")
    print(f"Wrote summary to: {summary_path(out)}")
    return EXIT_OK


def cmd_validate(ns: argparse.Namespace) -> int:
    scenario = parse_scenario(ns.scenario)
    print(f"Scenario {ns.scenario}: OK")
    if ns.show:
        print(format_scenario(scenario), end='')
    return EXIT_OK


def cmd_replay(ns: argparse.Namespace) -> int:
    results = validate_trace(ns.trace, rerun=ns.rerun)
    problems = {k: v for k, v in results.items() if k.endswith('_issues') and v}
    if not problems:
        print(f"Trace {ns.trace}: PASS")
        return EXIT_OK
    print(f"Trace {ns.trace}: FAIL")
    for key, issues in problems.items():
        print(f"  {key}: {len(issues)}")
        for issue in issues[:ns.max_issues]:
            print(f"    - {issue}")
    return EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='mesh-cli', description='Routing-based channel assignment simulator')
    p.add_argument('--log-level', default='WARNING', help='Logging level for library modules')
    sub = p.add_subparsers(dest='cmd')

    r = sub.add_parser('run', help='Simulate one scenario')
    r.add_argument('--scenario', required=True)
    r.add_argument('--seed', type=int, help='Replaces the scenario seed')
    r.add_argument('--trace', help='Write the replayable trace here')
    r.add_argument('--metrics', help='Write per-flow metrics CSV here')

    m = sub.add_parser('matrix', help='Run an experiment matrix to CSV')
    m.add_argument('--config', required=True)
    m.add_argument('--out', required=True)
    m.add_argument('--progress', action='store_true', help='Show a tqdm bar over matrix cells')

    v = sub.add_parser('validate', help='Check a scenario file')
    v.add_argument('--scenario', required=True)
    v.add_argument('--show', action='store_true', help='Print the scenario with defaults filled in')

    rp = sub.add_parser('replay', help='Re-check invariants over a recorded trace')
    rp.add_argument('--trace', required=True)
    rp.add_argument('--rerun', action='store_true', help='Also re-simulate and compare trace digests')
    rp.add_argument('--max-issues', type=int, default=10)

    sub.add_parser('generate-onepager', help='Generate results/results_onepager.md')
    sub.add_parser('run-tests', help='Run all repo tests (wrapper around scripts/run_all_tests.py)')
    return p


def main(argv: list[str] | None = None) -> int:
    argv = argv if argv is not None else sys.argv[1:]
    p = build_parser()
    ns, extras = p.parse_known_args(argv)

    if ns.cmd is None:
        p.print_help()
        return 2

    logging.basicConfig(level=getattr(logging, str(ns.log_level).upper(), logging.WARNING),
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')

    if ns.cmd == 'generate-onepager':
        return run_script('generate_results_onepager.py', extras)
    if ns.cmd == 'run-tests':
        return run_script('run_all_tests.py', extras)
    if extras:
        p.error(f"unrecognized arguments: {' '.join(extras)}")

    handlers = {'run': cmd_run, 'matrix': cmd_matrix, 'validate': cmd_validate, 'replay': cmd_replay}
    try:
        return handlers[ns.cmd](ns)
    except ConfigError as exc:
        print(f"Configuration error: {exc}")
        return EXIT_CONFIG
    except MatrixCellError as exc:
        print(f"Matrix failed: {exc}")
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}")
        return EXIT_CONFIG
    except (ValueError, KeyError, IndexError) as exc:
        print(f"Malformed input: {exc!r}")
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"Invariant violated: {exc}")
        return EXIT_INVARIANT


if __name__ == '__main__':
    raise SystemExit(main())
