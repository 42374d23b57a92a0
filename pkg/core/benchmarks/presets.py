"""Benchmark presets: unit-box fidelity functions plus run defaults."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple
import logging

import numpy as np

from config.benchmark_defaults import (
    BATTERY_GP,
    BENCHMARK_DEFAULTS,
    BIAS_SAFETY_FACTOR,
    BIAS_SCREEN_SIZE,
    OUTPUT_SCALING,
)
from core.benchmarks import functions as fn
from core.benchmarks.battery import build_constrained_grid, make_battery_objective
from core.domain import BoxDomain, Domain, GridDomain
from core.fidelity.specs import DelayModel, FidelitySpec, validate_fidelities

logger = logging.getLogger(__name__)

FidelityFn = Callable[[np.ndarray], np.ndarray]

PRESET_NAMES = tuple(BENCHMARK_DEFAULTS)


@dataclass(frozen=True)
class BenchmarkPreset:
    """Fidelity functions on the unit box (or a grid), lowest fidelity first."""
    name: str
    dim: int
    functions: Tuple[FidelityFn, ...]
    fidelities: Tuple[FidelitySpec, ...]
    domain: Domain
    optimum: Optional[float]
    batch_size: int
    capacity: float
    horizon: int
    divergences: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.functions) != len(self.fidelities):
            raise ValueError(f"{self.name}: {len(self.functions)} functions for "
                             f"{len(self.fidelities)} fidelity specs")
        validate_fidelities(self.fidelities)

    @property
    def n_fidelities(self) -> int:
        return len(self.functions)

    def evaluate(self, X: np.ndarray, m: int) -> np.ndarray:
        if not 1 <= m <= self.n_fidelities:
            raise ValueError(f"Fidelity {m} outside 1..{self.n_fidelities}")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self.functions[m - 1](X), dtype=float)

    def expected_delays(self) -> List[float]:
        return [spec.expected_delay() for spec in self.fidelities]


def _scaled(raw: FidelityFn, name: str, lower=0.0, upper=1.0) -> FidelityFn:
    shift, scale = OUTPUT_SCALING[name]
    lower = np.asarray(lower, dtype=float)
    span = np.asarray(upper, dtype=float) - lower

    def f(U: np.ndarray) -> np.ndarray:
        return (raw(lower + span * U) - shift) / scale
    return f


def _scale_value(value: float, name: str) -> float:
    shift, scale = OUTPUT_SCALING[name]
    return (value - shift) / scale


def _raw_functions(name: str, n_fidelities: int) -> Tuple[List[FidelityFn], float, object, object]:
    """Raw fidelity functions, raw optimum and input ranges."""
    if name in ("Currin2D", "BadCurrin2D"):
        return [fn.currin_low, fn.currin_raw], fn.CURRIN_OPTIMUM, 0.0, 1.0
    if name in ("Hartmann3D", "Hartmann6D"):
        A, P, optimum = ((fn.HARTMANN3_A, fn.HARTMANN3_P, fn.HARTMANN3_OPTIMUM) if name == "Hartmann3D"
                         else (fn.HARTMANN6_A, fn.HARTMANN6_P, fn.HARTMANN6_OPTIMUM))
        funcs = [(lambda X, a=fn.hartmann_alpha(m, n_fidelities): fn.hartmann(X, A, P, a))
                 for m in range(1, n_fidelities + 1)]
        return funcs, optimum, 0.0, 1.0
    if name == "Park4D":
        return ([fn.park_low, fn.park_raw], float(fn.park_raw(fn.PARK_ARGMAX[None, :])[0]), 0.0, 1.0)
    if name == "Borehole8D":
        return ([fn.borehole_low, fn.borehole_raw],
                float(fn.borehole_raw(fn.BOREHOLE_ARGMAX[None, :])[0]),
                fn.BOREHOLE_LOWER, fn.BOREHOLE_UPPER)
    if name == "Ackley40D":
        return [fn.ackley_low, fn.ackley_raw], 0.0, fn.ACKLEY_LOWER, fn.ACKLEY_UPPER
    raise ValueError(f"No raw functions for '{name}'")


def measure_bias(functions: Tuple[FidelityFn, ...], domain: Domain, n_points: int = BIAS_SCREEN_SIZE,
                 seed: int = 0) -> np.ndarray:
    """1.2 × max |f^(m) - f^(M)| over a random screen, one bound per fidelity."""
    if isinstance(domain, GridDomain):
        X = domain.points
    else:
        X = domain.sample(n_points, np.random.default_rng(seed))
    target = functions[-1](X)
    return np.array([BIAS_SAFETY_FACTOR * float(np.max(np.abs(f(X) - target))) for f in functions])


def _specs(name: str, bias: np.ndarray) -> Tuple[FidelitySpec, ...]:
    rows = BENCHMARK_DEFAULTS[name]["fidelities"]
    return tuple(
        FidelitySpec(cost=row["cost"], space=row["space"], delay=DelayModel(row["delay"]),
                     noise=row["noise"], bias=float(b))
        for row, b in zip(rows, bias)
    )


@lru_cache(maxsize=None)
def make_preset(name: str, benchmark_seed: int = 0) -> BenchmarkPreset:
    """
    Build a named preset.

    Raises:
        ValueError: for an unknown name; the message lists the valid ones
    """
    if name not in BENCHMARK_DEFAULTS:
        raise ValueError(f"Unknown benchmark '{name}'. Valid: {', '.join(PRESET_NAMES)}")
    defaults: Dict = BENCHMARK_DEFAULTS[name]
    dim = defaults["dim"]
    n_fidelities = len(defaults["fidelities"])

    if name == "BatterySurrogate":
        grid = build_constrained_grid(BATTERY_GP["n_base_points"], seed=benchmark_seed)
        domain: Domain = GridDomain(grid.points)
        low, high = make_battery_objective(benchmark_seed)
        functions = (_scaled(low, name), _scaled(high, name))
        optimum = float(np.max(functions[-1](grid.points)))
    else:
        raw, raw_optimum, lower, upper = _raw_functions(name, n_fidelities)
        domain = BoxDomain(dim)
        functions = tuple(_scaled(f, name, lower, upper) for f in raw)
        if name == "BadCurrin2D":
            high = functions[-1]
            functions = (lambda U: -high(U), high)
        optimum = _scale_value(raw_optimum, name)

    bias = measure_bias(functions, domain)
    bias[-1] = 0.0
    bias = np.maximum.accumulate(bias[::-1])[::-1]
    batch_size = defaults["batch_size"]
    capacity = defaults.get("capacity", float(batch_size * defaults["fidelities"][-1]["space"]))
    logger.debug(f"Preset {name}: bias bounds {np.round(bias, 4).tolist()}")
    return BenchmarkPreset(
        name=name, dim=dim, functions=functions, fidelities=_specs(name, bias), domain=domain,
        optimum=optimum, batch_size=batch_size, capacity=capacity, horizon=defaults["horizon"],
        divergences=tuple(defaults.get("divergences", ())),
    )
