"""Run defaults for every benchmark preset: fidelity costs, spaces, delays and budgets."""

# Fidelities are listed lowest first; the last entry is the target.
# Delays are in integer time steps, cost equals the delay unless stated.

BENCHMARK_DEFAULTS = {
    "Currin2D": {
        "dim": 2,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 5.0, "space": 1.0, "delay": 5, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 250,  # 200 target evaluations at 4 slots
        "divergences": ["assumed_delay_ratio_1_5"],
    },
    "BadCurrin2D": {
        "dim": 2,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 5.0, "space": 1.0, "delay": 5, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 250,
        "divergences": ["assumed_delay_ratio_1_5"],
    },
    "Hartmann3D": {
        "dim": 3,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 3.0, "space": 1.0, "delay": 3, "noise": 0.01},
            {"cost": 9.0, "space": 1.0, "delay": 9, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 450,
        "divergences": ["assumed_delay_ratio_1_3_9"],
    },
    "Hartmann6D": {
        "dim": 6,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 3.0, "space": 1.0, "delay": 3, "noise": 0.01},
            {"cost": 9.0, "space": 1.0, "delay": 9, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 450,
        "divergences": ["assumed_delay_ratio_1_3_9"],
    },
    "Park4D": {
        "dim": 4,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 5.0, "space": 1.0, "delay": 5, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 250,
        "divergences": ["assumed_delay_ratio_1_5"],
    },
    "Borehole8D": {
        "dim": 8,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 5.0, "space": 1.0, "delay": 5, "noise": 0.01},
        ],
        "batch_size": 4,
        "horizon": 250,
        "divergences": ["assumed_delay_ratio_1_5"],
    },
    "Ackley40D": {
        "dim": 40,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 5.0, "space": 1.0, "delay": 5, "noise": 0.01},
        ],
        "batch_size": 20,
        "horizon": 125,  # 500 target evaluations at 20 slots
        "divergences": ["assumed_delay_ratio_1_5", "ackley_low_fidelity_perturbation"],
    },
    "BatterySurrogate": {
        "dim": 6,
        "fidelities": [
            {"cost": 1.0, "space": 1.0, "delay": 1, "noise": 0.01},
            {"cost": 10.0, "space": 2.0, "delay": 10, "noise": 0.01},
        ],
        "batch_size": 20,
        "capacity": 20.0,
        "horizon": 300,
        "divergences": ["synthetic_gp_sample_objective", "random_feature_sampling"],
    },
}

# Output scaling f -> (f - shift) / scale brings every target to order one.
OUTPUT_SCALING = {
    "Currin2D": (7.5, 3.0),
    "BadCurrin2D": (7.5, 3.0),
    "Hartmann3D": (1.0, 1.0),
    "Hartmann6D": (1.0, 1.0),
    "Park4D": (12.0, 5.0),
    "Borehole8D": (150.0, 60.0),
    "Ackley40D": (-8.0, 4.0),
    "BatterySurrogate": (0.0, 1.0),
}

# Bias bounds are 1.2x the largest observed gap to the target on a screen of this size.
BIAS_SCREEN_SIZE = 100_000
BIAS_SAFETY_FACTOR = 1.2

BATTERY_GP = {
    "lengthscale": 0.2,
    "output_scale": 1.0,
    "n_features": 1024,
    "n_base_points": 256,
}
