#!/usr/bin/env python3
"""Generate a one-page markdown summary of every matrix run under `results/`.

For each `<name>.csv` written by `cli.py matrix` (and its `<name>_summary.csv`)
the page lists seed-averaged delivery rate and throughput per algorithm, the
R-CA gain over each baseline and the share of seeds with the expected
ordering. Stale manifests (md5 mismatch) are flagged.

Output: `results/results_onepager.md`
"""
from __future__ import annotations
import argparse
import sys
import textwrap
from pathlib import Path

import pandas as pd

REPO_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO_ROOT))

from src.utils.results_summary import (  # noqa: E402
    gain_table,
    load_results,
    ordering_share,
    summarize,
    verify_manifest,
)

RESULTS_DIR = REPO_ROOT / 'results'


def fmt(x, ndigits: int = 3) -> str:
    if x is None or pd.isna(x):
        return '-'
    return f"{float(x):.{ndigits}f}"


def find_result_files(results_dir: Path) -> list[Path]:
    return sorted(p for p in results_dir.glob('*.csv') if not p.stem.endswith('_summary'))


def section_for(path: Path) -> list[str]:
    results = load_results(path)
    summary_file = path.with_name(f"{path.stem}_summary.csv")
    summary = pd.read_csv(summary_file) if summary_file.exists() else summarize(results)
    sweep_key = str(results['sweep_key'].iloc[0]) if len(results) else '?'

    lines = [f"## {path.stem} (sweep: {sweep_key})", ""]
    manifest = path.with_name(f"{path.stem}_manifest.yaml")
    if manifest.exists():
        stale = verify_manifest(manifest)
        lines.append(f"Manifest: {'stale: ' + ', '.join(stale) if stale else 'hashes match'}")
        lines.append("")

    lines.append(f"| algorithm | {sweep_key} | seeds | delivery rate | ± | throughput kbit/s | ± |")
    lines.append("|:---|---:|---:|---:|---:|---:|---:|")
    for _, row in summary.iterrows():
        lines.append(f"| {row['algorithm']} | {row['sweep_value']:g} | {int(row['seeds'])} | "
                     f"{fmt(row['delivery_rate_mean'])} | {fmt(row['delivery_rate_std'])} | "
                     f"{fmt(row['throughput_kbps_mean'], 2)} | {fmt(row['throughput_kbps_std'], 2)} |")
    lines.append("")

    if 'rca' in set(summary['algorithm']) and summary['algorithm'].nunique() > 1:
        gains = gain_table(summary)
        cols = [c for c in gains.columns if c != 'sweep_value']
        lines.append(f"| {sweep_key} | " + ' | '.join(cols) + " |")
        lines.append("|---:|" + "---:|" * len(cols))
        for _, row in gains.iterrows():
            lines.append(f"| {row['sweep_value']:g} | " + ' | '.join(fmt(row[c], 2) for c in cols) + " |")
        lines.append("")

    if set(results['algorithm']) >= {'rca', 'static', 'single'}:
        share_dr = ordering_share(results, 'delivery_rate')
        share_tp = ordering_share(results, 'throughput_kbps')
        lines.append(f"- Seeds with rca ≥ static ≥ single: delivery rate {share_dr:.0%}, throughput {share_tp:.0%}")
        lines.append("")
    return lines


def format_onepager(files: list[Path], results_dir: Path = RESULTS_DIR) -> str:
    header = "# Results one-pager\n\n"
    overview = [f"- Matrix runs found: {len(files)}", f"- Results root: `{results_dir}`", ""]
    body = []
    for path in files:
        body.extend(section_for(path))
    footer = textwrap.dedent(
        """
        ---
        Notes:
        - Means and standard deviations are taken over seeds for each (algorithm, sweep value) cell.
        - Gains are ratios of seed-averaged throughput; a dash means the baseline delivered nothing.
        """
    )
    return header + '\n'.join(overview) + '\n' + '\n'.join(body) + '\n' + footer


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description='Render results/*.csv into a markdown one-pager')
    p.add_argument('--results-dir', default=str(RESULTS_DIR))
    p.add_argument('--out', default=str(RESULTS_DIR / 'results_onepager.md'))
    ns = p.parse_args(argv)

    results_dir = Path(ns.results_dir)
    files = find_result_files(results_dir) if results_dir.exists() else []
    if not files:
        print(f"No matrix CSVs found under {results_dir}. Nothing to summarize.")
        return 1

    out = Path(ns.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf8') as fh:
        fh.write(format_onepager(files, results_dir))

    print(f"Wrote one-pager to: {out}")
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
