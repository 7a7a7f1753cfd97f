"""Argument and input checks shared by estimators and the command line."""

import numpy as np

from .exceptions import ConfigError, InputError
from .graph import GRAPHS, METRICS
from .moments import MODES
from .scan import STATISTICS

INFERENCE = ("analytic", "analytic-skew", "permutation", "exhaustive")


def check_choice(value, choices, name):
    if value not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}; got {value!r}")
    return value


def check_statistics(statistic):
    """Normalize a statistic name or list of names to a tuple."""
    if statistic == "all":
        return STATISTICS
    stats = (statistic,) if isinstance(statistic, str) else tuple(statistic)
    for s in stats:
        check_choice(s, STATISTICS, "statistic")
    if not stats:
        raise ConfigError("no statistic requested")
    return stats


def check_alpha(alpha):
    if not 0 < float(alpha) < 1:
        raise ConfigError(f"alpha must lie in (0, 1); got {alpha}")
    return float(alpha)


def check_observations(X, min_n=4):
    """List of per-time observations (each a numpy array) from array-like input."""
    if isinstance(X, np.ndarray):
        if X.ndim == 1:
            X = X[:, None]
        obs = list(X)
    else:
        try:
            obs = [np.asarray(x) for x in X]
        except TypeError as exc:
            raise InputError("observations must be an iterable of array-likes") from exc
    if len(obs) == 0:
        raise InputError("empty sequence")
    shapes = {o.shape for o in obs}
    if len(shapes) != 1:
        raise InputError("observations do not share a common shape")
    if any(o.dtype.kind not in "biuf" for o in obs):
        raise InputError("observations must be numeric")
    if len(obs) < min_n:
        raise InputError(f"need at least {min_n} observations, got {len(obs)}")
    return obs


__all__ = [
    "GRAPHS",
    "INFERENCE",
    "METRICS",
    "MODES",
    "STATISTICS",
    "check_alpha",
    "check_choice",
    "check_observations",
    "check_statistics",
]
