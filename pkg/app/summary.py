"""Across-seed summaries of a results directory."""

from pathlib import Path
from typing import List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from app.results import FLOAT_FORMAT, list_results, read_result

logger = logging.getLogger(__name__)

REGRET_SUMMARY = 'summary_regret.csv'
FIDELITY_HISTOGRAM = 'summary_fidelity_histogram.csv'


def load_results(results_dir: Path) -> pd.DataFrame:
    """
    All result files stacked, with `strategy` and `seed` columns added.

    Raises:
        ValueError: when the directory holds no result files
    """
    found = list_results(results_dir)
    if not found:
        raise ValueError(f"No result files in {results_dir}")
    frames = []
    for strategy, by_seed in sorted(found.items()):
        for seed, path in sorted(by_seed.items()):
            frame = read_result(path)
            frame.insert(0, 'seed', seed)
            frame.insert(0, 'strategy', strategy)
            frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def _q25(values: pd.Series) -> float:
    return values.quantile(0.25)


def _q75(values: pd.Series) -> float:
    return values.quantile(0.75)


def regret_summary(results: pd.DataFrame) -> pd.DataFrame:
    """Median and quartiles of the regret at each sim_time, per strategy."""
    grouped = results.groupby(['strategy', 'sim_time'], sort=True)['regret']
    summary = grouped.agg(median='median', q25=_q25, q75=_q75, n_seeds='count').reset_index()
    return summary


def _submitted_columns(results: pd.DataFrame) -> List[str]:
    return [c for c in results.columns if c.startswith('submitted_')]


def histogram_edges(horizon: int, n_bins: int) -> np.ndarray:
    if n_bins < 1:
        raise ValueError(f"n_bins must be at least 1, got {n_bins}")
    return np.linspace(0.0, float(horizon), n_bins + 1)


def fidelity_histogram(results: pd.DataFrame, n_bins: int = 10,
                       horizon: Optional[int] = None) -> pd.DataFrame:
    """
    Queries submitted per fidelity in each time bin, summed over seeds.

    The bins partition [0, horizon]; a step at time t falls in the bin
    (edge_i, edge_{i+1}], the first bin also holding t = 0.
    """
    horizon = horizon or int(results['sim_time'].max())
    edges = histogram_edges(horizon, n_bins)
    columns = _submitted_columns(results)
    binned = results.assign(bin=pd.cut(results['sim_time'], edges, labels=False, include_lowest=True).astype(int))
    counts = binned.groupby(['strategy', 'bin'])[columns].sum()
    strategies = sorted(results['strategy'].unique())
    index = pd.MultiIndex.from_product([strategies, range(n_bins)], names=['strategy', 'bin'])
    counts = counts.reindex(index, fill_value=0).reset_index()
    counts.insert(2, 'bin_start', edges[counts['bin'].to_numpy()])
    counts.insert(3, 'bin_end', edges[counts['bin'].to_numpy() + 1])
    counts = counts.rename(columns={c: c.replace('submitted_', 'queries_') for c in columns})
    return counts.drop(columns='bin')


def summarize(results_dir: Path, out_dir: Optional[Path] = None, n_bins: int = 10) -> Tuple[Path, Path]:
    """Write both summary tables; result files are only read."""
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir is not None else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    results = load_results(results_dir)

    regret_path = out_dir / REGRET_SUMMARY
    regret_summary(results).to_csv(regret_path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    histogram_path = out_dir / FIDELITY_HISTOGRAM
    fidelity_histogram(results, n_bins).to_csv(histogram_path, index=False, float_format=FLOAT_FORMAT)

    n_files = results.groupby(['strategy', 'seed']).ngroups
    logger.info(f"Summarized {n_files} result files into {regret_path.name} and {histogram_path.name}")
    return regret_path, histogram_path

