"""Error types shared across the optimization stack."""

from typing import Any, Optional


class MFBOError(Exception):
    """Base class for library errors."""


class NumericalError(MFBOError):
    """A covariance factorization or quadrature failed."""

    def __init__(self, message: str, jitter: Optional[float] = None,
                 condition: Optional[float] = None):
        super().__init__(message)
        self.jitter = jitter
        self.condition = condition


class TrainingError(MFBOError):
    """Hyperparameter optimization diverged."""

    def __init__(self, message: str, last_params: Any = None):
        super().__init__(message)
        self.last_params = last_params


class EstimationError(MFBOError):
    """Penalizer parameters could not be estimated."""


class TrustRegionError(MFBOError):
    """The trust region no longer intersects the domain."""


class ConfigError(MFBOError):
    """Invalid run configuration."""


class RunError(MFBOError):
    """A run aborted; the partial record is attached."""

    def __init__(self, message: str, record: Any = None):
        super().__init__(message)
        self.record = record
