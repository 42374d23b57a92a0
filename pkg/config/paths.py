"""
Path configuration for the mfbatch project.
All directory and file paths are centralized here for easy maintenance.
"""
from pathlib import Path


class Paths:
    """
    Centralized path management.

    Usage:
        from config.paths import Paths

        config_file = Paths.resolve_config('smoke.cfg')
    """

    # ========================================================================
    # BASE DIRECTORY
    # ========================================================================
    BASE_DIR = Path(__file__).parent.parent.resolve()

    # ========================================================================
    # EXPERIMENT DIRECTORIES
    # ========================================================================
    EXPERIMENTS_DIR = BASE_DIR / 'experiments'
    CONFIGS_DIR = EXPERIMENTS_DIR / 'configs'
    RESULTS_DIR = EXPERIMENTS_DIR / 'results'

    @classmethod
    def resolve_config(cls, path) -> Path:
        """A bare file name that does not exist locally is looked up in CONFIGS_DIR."""
        path = Path(path)
        if not path.exists() and path.parent == Path('.'):
            bundled = cls.CONFIGS_DIR / path
            if bundled.exists():
                return bundled
        return path
