"""
Experiment Matrix Execution
Runs every (algorithm, sweep value, seed) cell of an ExperimentMatrix and writes
the per-cell CSV, the seed-averaged summary CSV and a YAML manifest.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import pandas as pd
from tqdm import tqdm

from src.mesh.scenario import ExperimentMatrix, Scenario
from src.mesh.simkernel import run
from src.utils.results_summary import summarize, write_manifest

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['algorithm', 'sweep_key', 'sweep_value', 'seed', 'delivery_rate', 'throughput_kbps',
                  'sent', 'delivered', 'collided']
FLOAT_FORMAT = '%.6f'

##command


class MatrixCellError(RuntimeError):
    """A matrix cell failed; carries the cell key."""

    def __init__(self, algorithm: str, sweep_value: Any, seed: int, cause: BaseException):
        self.algorithm = algorithm
        self.sweep_value = sweep_value
        self.seed = seed
        super().__init__(f"cell algorithm={algorithm} sweep_value={sweep_value} seed={seed} failed: {cause}")


def run_cell(scenario: Scenario, sweep_key: str, sweep_value: Any, seed: int) -> Dict[str, Any]:
    """Run one cell; kept at module level so worker processes can pickle it."""
    metrics = run(scenario, seed, keep_trace=False).metrics
    return {
        'algorithm': scenario.algorithm,
        'sweep_key': sweep_key,
        'sweep_value': sweep_value,
        'seed': seed,
        'delivery_rate': metrics.delivery_rate,
        'throughput_kbps': metrics.throughput_kbps,
        'sent': metrics.sent,
        'delivered': metrics.delivered,
        'collided': metrics.collided,
    }


def _cell_jobs(matrix: ExperimentMatrix) -> List[Tuple[Scenario, str, Any, int]]:
    return [(matrix.scenario_for(a, v, s), matrix.sweep_key, v, s) for a, v, s in matrix.cells()]


def run_matrix_frame(matrix: ExperimentMatrix, progress: bool = False) -> pd.DataFrame:
    """All cells as a DataFrame sorted by (algorithm, sweep_value, seed), whatever the completion order."""
    jobs = _cell_jobs(matrix)
    rows: List[Dict[str, Any]] = []
    bar = tqdm(total=len(jobs), desc=f"matrix {matrix.sweep_key}", unit='cell', disable=not progress)

    if matrix.workers == 1:
        for scenario, key, value, seed in jobs:
            try:
                rows.append(run_cell(scenario, key, value, seed))
            except Exception as exc:
                raise MatrixCellError(scenario.algorithm, value, seed, exc) from exc
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=matrix.workers) as pool:
            futures = {pool.submit(run_cell, *job): job for job in jobs}
            for fut in as_completed(futures):
                scenario, _, value, seed = futures[fut]
                try:
                    rows.append(fut.result())
                except Exception as exc:
                    for other in futures:
                        other.cancel()
                    raise MatrixCellError(scenario.algorithm, value, seed, exc) from exc
                bar.update(1)
    bar.close()

    df = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return df.sort_values(['algorithm', 'sweep_value', 'seed'], kind='mergesort').reset_index(drop=True)


def summary_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}_summary.csv")


def manifest_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}_manifest.yaml")


def run_matrix(matrix: ExperimentMatrix, output: Union[str, Path], progress: bool = False) -> Path:
    """
    Execute the matrix and write ``output`` plus ``<stem>_summary.csv`` and
    ``<stem>_manifest.yaml`` next to it. Same matrix, same bytes.
    """
    output = Path(output)
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {output.parent}: {exc}") from exc

    df = run_matrix_frame(matrix, progress=progress)
    for col in ('delivery_rate', 'throughput_kbps'):
        df[col] = df[col].astype(float)

    summary = summarize(df)
    df.to_csv(output, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    summary.to_csv(summary_path(output), index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info("wrote %d rows to %s", len(df), output)

    write_manifest(manifest_path(output), [output, summary_path(output)], {
        'sweep_key': matrix.sweep_key,
        'sweep_values': [float(v) if matrix.sweep_key == 'rate' else int(v) for v in matrix.sweep_values],
        'algorithms': list(matrix.algorithms),
        'seeds': [int(s) for s in matrix.seeds],
        'cells': int(len(df)),
    })
    return output
