"""Result tables and the run manifest."""

from pathlib import Path
from typing import Dict, Iterable, List, Optional
import json
import logging
import re

import numpy as np
import pandas as pd

from core import __version__
from core.simulation.records import RunRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.10g'
MANIFEST_NAME = 'manifest.json'
RESULT_PATTERN = re.compile(r'^(?P<strategy>.+)__seed(?P<seed>-?\d+)\.csv$')


def fidelity_labels(n_fidelities: int) -> List[str]:
    """low, f2, ..., f{M-1}, high."""
    if n_fidelities == 1:
        return ['high']
    middle = [f'f{m}' for m in range(2, n_fidelities)]
    return ['low', *middle, 'high']


def result_columns(n_fidelities: int) -> List[str]:
    labels = fidelity_labels(n_fidelities)
    return (['sim_time', 'best_hf', 'regret', 'occupied_space']
            + [f'pending_{label}' for label in labels]
            + [f'submitted_{label}' for label in labels])


def result_frame(record: RunRecord) -> pd.DataFrame:
    """One row per simulated step; a missing regret or best value is NaN."""
    labels = fidelity_labels(record.n_fidelities)
    rows = []
    for step in record.steps:
        row = {
            'sim_time': step.time,
            'best_hf': step.best_hf,
            'regret': np.nan if step.regret is None else step.regret,
            'occupied_space': step.occupied_space,
        }
        row.update({f'pending_{label}': n for label, n in zip(labels, step.pending)})
        row.update({f'submitted_{label}': n for label, n in zip(labels, step.submitted)})
        rows.append(row)
    return pd.DataFrame(rows, columns=result_columns(record.n_fidelities))


def result_path(out_dir: Path, strategy: str, seed: int) -> Path:
    return Path(out_dir) / f"{strategy}__seed{seed}.csv"


def write_result(record: RunRecord, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = result_path(out_dir, record.strategy, record.seed)
    result_frame(record).to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    logger.info(f"Wrote {len(record.steps)} steps to {path}")
    return path


def read_result(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)


def list_results(results_dir: Path) -> Dict[str, Dict[int, Path]]:
    """strategy -> seed -> file, for every result file in the directory."""
    found: Dict[str, Dict[int, Path]] = {}
    for path in sorted(Path(results_dir).glob('*.csv')):
        match = RESULT_PATTERN.match(path.name)
        if match:
            found.setdefault(match['strategy'], {})[int(match['seed'])] = path
    return found


def write_manifest(out_dir: Path, config_echo: Dict, seeds: Iterable[int], config_hash: str,
                   divergences: Iterable[str], status: Optional[Dict[int, str]] = None) -> Path:
    """Config echo, seeds, package version, config hash and divergence flags."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        'version': __version__,
        'config': config_echo,
        'config_hash': config_hash,
        'seeds': list(seeds),
        'divergences': list(divergences),
        'status': {str(seed): state for seed, state in sorted((status or {}).items())},
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    logger.info(f"Wrote manifest to {path}")
    return path
