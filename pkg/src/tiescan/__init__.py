"""Graph-based change-point detection for sequences with repeated observations."""

from .estimators import BinarySegmentation, ChangedIntervalDetector, GraphChangePointDetector, shared_change_points
from .exceptions import ConfigError, DegenerateStatisticError, InputError, TiescanError
from .sequence import CategorizedSequence, categorize, contingency_at, reverse

__version__ = "0.1.0"

__all__ = [
    "BinarySegmentation",
    "CategorizedSequence",
    "ChangedIntervalDetector",
    "ConfigError",
    "DegenerateStatisticError",
    "GraphChangePointDetector",
    "InputError",
    "TiescanError",
    "categorize",
    "contingency_at",
    "reverse",
    "shared_change_points",
]
