"""Centralized library and run settings."""
import os
from pathlib import Path
from dotenv import load_dotenv

from config.paths import Paths

load_dotenv()


class Settings:
    """Numerical defaults and environment overrides."""

    # Paths
    MFABO_OUT = Path(os.getenv('MFABO_OUT', Paths.RESULTS_DIR))

    # Runtime
    MFABO_LOG_LEVEL = os.getenv('MFABO_LOG_LEVEL', 'INFO')
    MFABO_JOBS = int(os.getenv('MFABO_JOBS', '1'))
    MFABO_GRID_CAP = int(os.getenv('MFABO_GRID_CAP', '7500'))

    # Factorization
    JITTER_START = 1e-8  # relative to the output scale
    JITTER_CEILING = 1e-4

    # Hyperparameter training
    TRAIN_LEARNING_RATE = 0.1
    TRAIN_EPOCHS = 75
    PRIOR_PENALTY_WEIGHT = 100.0
    REFIT_EVERY = 20

    # Acquisition optimization
    REFINE_LEARNING_RATE = 0.01
    REFINE_EPOCHS = 75
    N_RESTARTS = 10
    SCREEN_PER_DIM_INDEPENDENT = 7500  # multiplied by the input dimension
    SCREEN_MULTITASK = 7500
    SCREEN_MES = 3750

    # Information-based methods
    N_FANTASIES = 100
    N_MAX_VALUE_SAMPLES = 100
    MES_GRID_SIZE = 1024
    MES_INTERVALS = 500

    # Fidelity selection
    DEFAULT_GAMMA = 0.1
    DEFAULT_BETA = 4.0

    # Penalization
    LIPSCHITZ_FLOOR = 1e-4
    LOCAL_HALF_WIDTH = 0.1
    LOCAL_POINTS_PER_DIM = 500
    GLOBAL_POINTS_PER_DIM = 1000
