"""Command-line entry point: run seeded sweeps, summarize results, list presets and strategies."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from app.results import write_manifest, write_result
from app.run_config import RunConfig, load_run_config, parse_seeds
from app.summary import summarize
from config.settings import Settings
from config.strategies import STRATEGIES
from core.benchmarks.presets import PRESET_NAMES, make_preset
from core.exceptions import ConfigError, RunError
from core.simulation import engine

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_RUN_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


def _run_seed(config: RunConfig, seed: int, out_dir: Path) -> Tuple[int, str]:
    """One seeded run in a worker; the result file is written even when the run aborts."""
    try:
        record = engine.run(config.engine_config(), seed)
    except RunError as e:
        logger.error(f"Seed {seed} failed: {e}")
        if e.record is not None:
            write_result(e.record, out_dir)
        return seed, f"failed: {e}"
    write_result(record, out_dir)
    return seed, 'completed'


def run_command(config_path: Path, overrides: Sequence[str] = (), seeds: Optional[List[int]] = None,
                out: Optional[Path] = None, jobs: int = 1) -> int:
    try:
        config = load_run_config(config_path, overrides)
        # Preset construction can still reject the configuration.
        engine_config = config.engine_config()
    except (ConfigError, ValueError) as e:
        logger.error(str(e))
        return EXIT_BAD_CONFIG

    seeds = seeds if seeds is not None else config.seeds
    out_dir = Path(out or config.out or Settings.MFABO_OUT)
    out_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"{config.strategy} on {config.benchmark}: {len(seeds)} seeds, {jobs} jobs, output {out_dir}")

    outcomes = Parallel(n_jobs=jobs, return_as='generator')(
        delayed(_run_seed)(config, seed, out_dir) for seed in seeds)
    status = dict(tqdm(outcomes, total=len(seeds), desc=config.strategy, unit='seed'))

    write_manifest(out_dir, config.model_dump(mode='json'), seeds, config.config_hash(),
                   engine_config.preset.divergences, status)
    failed = [seed for seed, state in status.items() if state != 'completed']
    if failed:
        logger.error(f"{len(failed)} of {len(seeds)} seeds failed: {failed}")
        return EXIT_RUN_FAILED
    return EXIT_OK


def summarize_command(results_dir: Path, out: Optional[Path] = None, bins: int = 10) -> int:
    try:
        regret_path, histogram_path = summarize(results_dir, out, bins)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_BAD_CONFIG
    print(regret_path)
    print(histogram_path)
    return EXIT_OK


def benchmark_table() -> pd.DataFrame:
    rows = []
    for name in PRESET_NAMES:
        preset = make_preset(name)
        rows.append({
            'benchmark': name,
            'dim': preset.dim,
            'fidelities': preset.n_fidelities,
            'delays': ','.join(str(s.delay.mean) for s in preset.fidelities),
            'spaces': ','.join(f'{s.space:g}' for s in preset.fidelities),
            'batch_size': preset.batch_size,
            'capacity': preset.capacity,
            'horizon': preset.horizon,
        })
    return pd.DataFrame(rows)


def strategy_table() -> pd.DataFrame:
    return pd.DataFrame([{'strategy': name, **row} for name, row in STRATEGIES.items()])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='mfbatch', description=__doc__)
    parser.add_argument('--verbose', '-v', action='store_true', help='log per-step detail')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='execute a seeded sweep from a config file')
    run.add_argument('--config', type=Path, required=True)
    seeds = run.add_mutually_exclusive_group()
    seeds.add_argument('--seed', type=int)
    seeds.add_argument('--seeds', type=str, help='A..B, inclusive')
    run.add_argument('--jobs', type=int, default=Settings.MFABO_JOBS)
    run.add_argument('--out', type=Path)
    run.add_argument('--override', action='append', default=[], metavar='KEY=VALUE')

    summary = commands.add_parser('summarize', help='regret quartiles and fidelity histograms')
    summary.add_argument('results_dir', type=Path)
    summary.add_argument('--out', type=Path)
    summary.add_argument('--bins', type=int, default=10)

    commands.add_parser('list-benchmarks', help='preset names and their defaults')
    commands.add_parser('list-strategies', help='the compared optimizers')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else Settings.MFABO_LOG_LEVEL,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    if args.command == 'run':
        seeds = None
        try:
            if args.seed is not None:
                seeds = [args.seed]
            elif args.seeds:
                seeds = parse_seeds(args.seeds)
        except ValueError as e:
            logger.error(f"Bad seed list: {e}")
            return EXIT_BAD_CONFIG
        if args.jobs < 1:
            logger.error(f"--jobs must be at least 1, got {args.jobs}")
            return EXIT_BAD_CONFIG
        return run_command(args.config, args.override, seeds, args.out, args.jobs)
    if args.command == 'summarize':
        return summarize_command(args.results_dir, args.out, args.bins)
    if args.command == 'list-benchmarks':
        print(benchmark_table().to_string(index=False))
        return EXIT_OK
    print(strategy_table().to_string(index=False))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
