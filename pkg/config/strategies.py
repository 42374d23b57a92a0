"""The compared optimizers: acquisition, batching, fidelity rule and surrogate for each."""

STRATEGIES = {
    "UCB": {
        "acquisition": "ucb",
        "batching": "random_fill",
        "fidelity_rule": "target",
        "model": "single",
    },
    "MF-GP-UCB": {
        "acquisition": "mf_ucb",
        "batching": "random_fill",
        "fidelity_rule": "variance",
        "model": "independent",
    },
    "MF-GP-UCB+LP": {
        "acquisition": "mf_ucb",
        "batching": "penalization",
        "fidelity_rule": "variance",
        "model": "independent",
    },
    "PLAyBOOK-UCB": {
        "acquisition": "ucb",
        "batching": "penalization",
        "fidelity_rule": "target",
        "model": "single",
    },
    "UCB-V-LP": {
        "acquisition": "ucb",
        "batching": "penalization",
        "fidelity_rule": "variance",
        "model": "multitask",
    },
    "UCB-I-LP": {
        "acquisition": "ucb",
        "batching": "penalization",
        "fidelity_rule": "information",
        "model": "multitask",
    },
    "TuRBO-TS": {
        "acquisition": "thompson",
        "batching": "trust_region",
        "fidelity_rule": "target",
        "model": "single",
    },
    "TuRBO-V-TS": {
        "acquisition": "thompson",
        "batching": "trust_region",
        "fidelity_rule": "variance",
        "model": "multitask",
    },
    "TuRBO-I-TS": {
        "acquisition": "thompson",
        "batching": "trust_region",
        "fidelity_rule": "information",
        "model": "multitask",
    },
    "MF-MES": {
        "acquisition": "mes",
        "batching": "fantasies",
        "fidelity_rule": "information",
        "model": "multitask",
    },
}
