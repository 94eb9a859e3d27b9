from .errors import (
    BellLinkError,
    InvalidParameterError,
    UnsortedStreamError,
    StrategyFileError,
    ConfigMismatchError,
    UndefinedCorrelationError,
    FitConvergenceError,
)

__version__ = "1.0"

__all__ = [
    "BellLinkError",
    "InvalidParameterError",
    "UnsortedStreamError",
    "StrategyFileError",
    "ConfigMismatchError",
    "UndefinedCorrelationError",
    "FitConvergenceError",
]
