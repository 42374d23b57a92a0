"""Thompson-sampling selection on a finite grid."""

from typing import Optional

import numpy as np

from config.settings import Settings
from core.multifidelity.surrogate import MultiFidelitySurrogate, sample_on_grid


def thompson_select(surrogate: MultiFidelitySurrogate, grid: np.ndarray, seed: int,
                    m: Optional[int] = None, cap: int = Settings.MFABO_GRID_CAP) -> np.ndarray:
    """
    Argmax over `grid` of one joint posterior sample of f^(m).

    Pending queries are never consulted; diversity within a batch comes
    from distinct seeds.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, surrogate.dim)
    sample = sample_on_grid(surrogate, grid, m or surrogate.n_fidelities, seed, cap)
    return grid[int(np.argmax(sample))].copy()
