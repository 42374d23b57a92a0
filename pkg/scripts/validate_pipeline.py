#!/usr/bin/env python
"""Short sweep over every preset and strategy checking batch-space safety and conservation."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse
import logging

from tqdm import tqdm

from core.benchmarks.presets import PRESET_NAMES, make_preset
from core.exceptions import RunError
from core.gp.training import TrainConfig
from core.simulation import EngineConfig, get_strategy, run
from core.simulation.strategies import STRATEGY_NAMES

logger = logging.getLogger(__name__)


def check_record(record, config: EngineConfig) -> list:
    """Problems found in one run trace; empty when the run is consistent."""
    problems = []
    capacity = config.resolved_capacity
    spaces = [spec.space for spec in config.specs]
    for step in record.steps:
        if step.occupied_space > capacity + 1e-9:
            problems.append(f"t={step.time}: occupied {step.occupied_space} > {capacity}")
        pending_space = sum(n * s for n, s in zip(step.pending, spaces))
        if abs(pending_space - step.occupied_space) > 1e-9:
            problems.append(f"t={step.time}: pending space {pending_space} != occupied {step.occupied_space}")
    submitted = {e.query_id for e in record.submissions()}
    arrived = {e.query_id for e in record.arrivals()}
    if not arrived <= submitted:
        problems.append("observations arrived for queries never submitted")
    in_flight = sum(record.steps[-1].pending) if record.steps else 0
    if len(submitted) != len(arrived) + in_flight:
        problems.append(f"{len(submitted)} submitted, {len(arrived)} arrived, {in_flight} pending")
    return problems


def quick_config(benchmark: str, strategy: str, horizon: int) -> EngineConfig:
    return EngineConfig(
        preset=make_preset(benchmark), strategy=get_strategy(strategy), horizon=horizon,
        train=TrainConfig(epochs=5), n_screen=100, n_restarts=1, refine_epochs=5,
        n_fantasies=4, n_max_values=4, max_value_grid=64, turbo_candidates=256,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument('--horizon', type=int, default=12)
    parser.add_argument('--seeds', type=int, default=3)
    parser.add_argument('--benchmarks', nargs='*', default=list(PRESET_NAMES))
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    print("=" * 50)
    print("Budget-safety sweep")
    print("=" * 50)

    cases = [(b, s, seed) for b in args.benchmarks for s in STRATEGY_NAMES for seed in range(args.seeds)]
    failures = []
    for benchmark, strategy, seed in tqdm(cases, unit='run'):
        config = quick_config(benchmark, strategy, args.horizon)
        try:
            record = run(config, seed)
        except RunError as e:
            failures.append(f"{benchmark}/{strategy}/seed{seed}: aborted: {e}")
            continue
        failures.extend(f"{benchmark}/{strategy}/seed{seed}: {p}" for p in check_record(record, config))

    if failures:
        print(f"\n{len(failures)} problems:")
        for line in failures:
            print(f"  - {line}")
        sys.exit(1)
    print(f"\nAll {len(cases)} runs respected the budget.")


if __name__ == "__main__":
    main()
