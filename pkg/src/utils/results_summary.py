"""
Simulation Results Summary
Seed-averaged tables, algorithm gain ratios, ordering shares and the YAML
manifest written next to every matrix CSV.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Union

import pandas as pd
import yaml

ALGORITHM_ORDER = ('rca', 'static', 'single')

##command


def file_md5(path: Union[str, Path]) -> str:
    with open(path, 'rb') as fh:
        return hashlib.md5(fh.read()).hexdigest()


def load_results(path: Union[str, Path]) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = {'algorithm', 'sweep_value', 'seed', 'delivery_rate', 'throughput_kbps'} - set(df.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    return df


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """Mean and std of delivery rate and throughput per (algorithm, sweep_value)."""
    grouped = results.groupby(['algorithm', 'sweep_key', 'sweep_value'], sort=True)
    out = grouped.agg(
        seeds=('seed', 'count'),
        delivery_rate_mean=('delivery_rate', 'mean'),
        delivery_rate_std=('delivery_rate', 'std'),
        throughput_kbps_mean=('throughput_kbps', 'mean'),
        throughput_kbps_std=('throughput_kbps', 'std'),
        sent_mean=('sent', 'mean'),
        collided_mean=('collided', 'mean'),
    ).reset_index()
    # single seed -> std undefined
    return out.fillna({'delivery_rate_std': 0.0, 'throughput_kbps_std': 0.0})


def gain_table(summary: pd.DataFrame, metric: str = 'throughput_kbps_mean', reference: str = 'rca') -> pd.DataFrame:
    """Ratio reference/other per sweep value for every other algorithm present."""
    wide = summary.pivot(index='sweep_value', columns='algorithm', values=metric)
    if reference not in wide.columns:
        raise ValueError(f"no rows for reference algorithm {reference!r}")
    gains = pd.DataFrame(index=wide.index)
    for algo in wide.columns:
        if algo == reference:
            continue
        ratio = wide[reference] / wide[algo]
        gains[f"{reference}_over_{algo}"] = ratio.where(wide[algo] > 0)
    return gains.reset_index()


def ordering_share(results: pd.DataFrame, metric: str = 'delivery_rate',
                   order: Sequence[str] = ALGORITHM_ORDER, strict: bool = False,
                   sweep_values: Optional[Iterable[Any]] = None) -> float:
    """
    Fraction of (sweep_value, seed) pairs where ``metric`` follows ``order``
    (first algorithm best). Pairs missing an algorithm are ignored.
    """
    df = results
    if sweep_values is not None:
        df = df[df['sweep_value'].isin(list(sweep_values))]
    wide = df.pivot_table(index=['sweep_value', 'seed'], columns='algorithm', values=metric)
    wide = wide.dropna(subset=[a for a in order if a in wide.columns])
    if wide.empty or any(a not in wide.columns for a in order):
        return 0.0
    ok = pd.Series(True, index=wide.index)
    for better, worse in zip(order, order[1:]):
        ok &= (wide[better] > wide[worse]) if strict else (wide[better] >= wide[worse])
    return float(ok.mean())


def write_manifest(path: Union[str, Path], files: Sequence[Union[str, Path]], extra: Optional[Dict[str, Any]] = None) -> Path:
    """YAML manifest naming each written file with its row count and md5."""
    path = Path(path)
    entries = {}
    for f in files:
        f = Path(f)
        with open(f, 'r', encoding='utf8') as fh:
            rows = sum(1 for _ in fh) - 1
        entries[f.name] = {'rows': rows, 'md5': file_md5(f)}
    manifest = dict(extra or {})
    manifest['files'] = entries
    with open(path, 'w', encoding='utf8') as fh:
        yaml.safe_dump(manifest, fh, sort_keys=True)
    return path


def read_manifest(path: Union[str, Path]) -> Optional[dict]:
    path = Path(path)
    if not path.exists():
        return None
    with open(path, 'r', encoding='utf8') as fh:
        return yaml.safe_load(fh) or {}


def verify_manifest(path: Union[str, Path]) -> list[str]:
    """Files whose current md5 no longer matches the manifest."""
    path = Path(path)
    manifest = read_manifest(path) or {}
    stale = []
    for name, info in (manifest.get('files') or {}).items():
        target = path.parent / name
        if not target.exists() or file_md5(target) != info.get('md5'):
            stale.append(name)
    return stale
