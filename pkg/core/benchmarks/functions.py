"""
Multi-fidelity test functions on raw input ranges.

Every function maps an (N, d) array to (N,) and is written to be maximized.
Raw ranges are mapped from the unit box by the presets.
"""

import numpy as np


# Currin exponential, d = 2, on [0, 1]^2

def currin_raw(X: np.ndarray) -> np.ndarray:
    x1, x2 = X[:, 0], X[:, 1]
    with np.errstate(divide='ignore'):
        decay = 1.0 - np.exp(-1.0 / (2.0 * x2))
    num = 2300 * x1 ** 3 + 1900 * x1 ** 2 + 2092 * x1 + 60
    den = 100 * x1 ** 3 + 500 * x1 ** 2 + 4 * x1 + 20
    return decay * num / den


def currin_low(X: np.ndarray) -> np.ndarray:
    """Average of four shifted evaluations; the second coordinate is floored at zero."""
    x1, x2 = X[:, 0], X[:, 1]
    shifted = []
    for dx, dy in ((0.05, 0.05), (0.05, -0.05), (-0.05, 0.05), (-0.05, -0.05)):
        shifted.append(currin_raw(np.column_stack([x1 + dx, np.maximum(0.0, x2 + dy)])))
    return sum(shifted) / 4.0


CURRIN_OPTIMUM = 13.7987


# Hartmann, 3 and 6 dimensions, on [0, 1]^d

HARTMANN_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN_DELTA = np.array([0.01, -0.01, -0.1, 0.1])

HARTMANN3_A = np.array([[3.0, 10.0, 30.0],
                        [0.1, 10.0, 35.0],
                        [3.0, 10.0, 30.0],
                        [0.1, 10.0, 35.0]])
HARTMANN3_P = 1e-4 * np.array([[3689, 1170, 2673],
                               [4699, 4387, 7470],
                               [1091, 8732, 5547],
                               [381, 5743, 8828]])
HARTMANN3_OPTIMUM = 3.86278
HARTMANN3_ARGMAX = np.array([0.114614, 0.555649, 0.852547])

HARTMANN6_A = np.array([[10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
                        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
                        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
                        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0]])
HARTMANN6_P = 1e-4 * np.array([[1312, 1696, 5569, 124, 8283, 5886],
                               [2329, 4135, 8307, 3736, 1004, 9991],
                               [2348, 1451, 3522, 2883, 3047, 6650],
                               [4047, 8828, 8732, 5743, 1091, 381]])
HARTMANN6_OPTIMUM = 3.32237
HARTMANN6_ARGMAX = np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573])


def hartmann(X: np.ndarray, A: np.ndarray, P: np.ndarray, alpha: np.ndarray = HARTMANN_ALPHA) -> np.ndarray:
    """Σ_i α_i·exp(-Σ_j A_ij (x_j - P_ij)²)."""
    inner = np.sum(A[None, :, :] * (X[:, None, :] - P[None, :, :]) ** 2, axis=2)
    return np.exp(-inner) @ alpha


def hartmann_alpha(m: int, n_fidelities: int) -> np.ndarray:
    """Coefficients of fidelity m; lower fidelities drift further from the target."""
    return HARTMANN_ALPHA + (n_fidelities - m) * HARTMANN_DELTA


# Park, d = 4, on [0, 1]^4

def park_raw(X: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4 = X.T
    # ½(√(x1² + (x2 + x3²)x4) - x1) equals (x1/2)(√(1 + (x2 + x3²)x4/x1²) - 1) for x1 > 0
    root = 0.5 * (np.sqrt(x1 ** 2 + (x2 + x3 ** 2) * x4) - x1)
    return root + (x1 + 3.0 * x4) * np.exp(1.0 + np.sin(x3))


def park_low(X: np.ndarray) -> np.ndarray:
    x1, x2, x3, _ = X.T
    return (1.0 + np.sin(x1) / 10.0) * park_raw(X) - 2.0 * x1 + x2 ** 2 + x3 ** 2 + 0.5


PARK_ARGMAX = np.ones(4)


# Borehole, d = 8, on physical ranges

BOREHOLE_LOWER = np.array([0.05, 100.0, 63070.0, 990.0, 63.1, 700.0, 1120.0, 9855.0])
BOREHOLE_UPPER = np.array([0.15, 50000.0, 115600.0, 1110.0, 116.0, 820.0, 1680.0, 12045.0])
# rw, r, Tu, Hu, Tl, Hl, L, Kw at the maximizing corner
BOREHOLE_ARGMAX = np.array([0.15, 100.0, 115600.0, 1110.0, 116.0, 700.0, 1120.0, 12045.0])


def _borehole(X: np.ndarray, scale: float, offset: float) -> np.ndarray:
    rw, r, Tu, Hu, Tl, Hl, L, Kw = X.T
    log_ratio = np.log(r / rw)
    den = log_ratio * (offset + 2.0 * L * Tu / (log_ratio * rw ** 2 * Kw) + Tu / Tl)
    return scale * Tu * (Hu - Hl) / den


def borehole_raw(X: np.ndarray) -> np.ndarray:
    return _borehole(X, 2.0 * np.pi, 1.0)


def borehole_low(X: np.ndarray) -> np.ndarray:
    return _borehole(X, 5.0, 1.5)


# Ackley, negated so that the optimum is a maximum of 0, on [-5, 10]^d

ACKLEY_LOWER = -5.0
ACKLEY_UPPER = 10.0


def ackley_raw(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    rms = np.sqrt(np.sum(X ** 2, axis=1) / d)
    cos_mean = np.sum(np.cos(2.0 * np.pi * X), axis=1) / d
    return 20.0 * np.exp(-0.2 * rms) + np.exp(cos_mean) - 20.0 - np.e


def ackley_low(X: np.ndarray) -> np.ndarray:
    """Target plus a smooth additive perturbation along the mean unit coordinate."""
    unit = (X - ACKLEY_LOWER) / (ACKLEY_UPPER - ACKLEY_LOWER)
    return ackley_raw(X) + 0.5 * np.sin(2.0 * np.pi * unit.mean(axis=1))
