"""Multi-fidelity benchmark problems."""
from core.benchmarks.battery import ConstrainedGrid, build_constrained_grid, make_battery_objective
from core.benchmarks.presets import PRESET_NAMES, BenchmarkPreset, make_preset, measure_bias

__all__ = [
    'ConstrainedGrid', 'build_constrained_grid', 'make_battery_objective',
    'PRESET_NAMES', 'BenchmarkPreset', 'make_preset', 'measure_bias',
]
