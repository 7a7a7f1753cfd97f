"""Analytic tail approximations for the single-change scan statistics."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .exceptions import ConfigError, InputError

TAIL_STATISTICS = ("Zw", "Zd-abs", "M", "S")


def nu(s):
    """Overshoot correction factor; ``nu(0) = 1``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise InputError("nu requires s >= 0")
    out = np.ones_like(s)
    big = s > 1e-8
    h = s[big] / 2
    cdf = norm.cdf(h)
    out[big] = (2 / s[big]) * (cdf - 0.5) / (h * cdf + norm.pdf(h))
    return out if out.ndim else float(out)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise InputError("x must lie in (0, 1)")
    return x


def h_w(n, x):
    x = _check_x(x)
    return (n - 1) * (2 * n * x**2 - 2 * n * x + 1) / (2 * x * (1 - x) * (n**2 * x**2 - n**2 * x + n - 1))


def h_d(n, x):
    x = _check_x(x)
    return 1 / (2 * x * (1 - x))


def h_w_limit(x):
    x = _check_x(x)
    return 1 / (x * (1 - x))


def h_d_limit(x):
    x = _check_x(x)
    return 1 / (2 * x * (1 - x))


def h_functions(n, x):
    """``(h_w(n, x), h_d(n, x), h_w*(x), h_d*(x))``."""
    return h_w(n, x), h_d(n, x), h_w_limit(x), h_d_limit(x)


@dataclass
class ApproxPValue:
    value: float
    correction: str = "none"
    inapplicable: int = 0

    def as_dict(self):
        return {"value": self.value, "correction": self.correction, "inapplicable": self.inapplicable}


def _simpson_weights(panels):
    if panels < 2 or panels % 2:
        raise ConfigError("panel count must be an even number >= 2")
    w = np.ones(panels + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / 3


def _grid(n, n0, n1, panels):
    if not 0 < n0 < n1 < n:
        raise InputError(f"need 0 < n0 < n1 < n, got n0={n0}, n1={n1}, n={n}")
    x = np.linspace(n0 / n, n1 / n, panels + 1)
    return x, _simpson_weights(panels) * (x[1] - x[0])


def skew_factor(b, gamma):
    """Marginal skewness correction ``H`` and a mask of points where it is unusable."""
    gamma = np.asarray(gamma, dtype=float)
    H = np.ones_like(gamma)
    small = np.abs(gamma) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        disc = 1 + 2 * gamma * b
        theta = np.where(small, b, (np.sqrt(np.where(disc >= 0, disc, np.nan)) - 1) / np.where(small, 1, gamma))
        denom = 1 + gamma * theta
        val = np.exp(0.5 * (b - theta) ** 2 + gamma * theta**3 / 6) / np.sqrt(denom)
    bad = ~small & ((disc < 0) | ~(denom > 0) | ~np.isfinite(val))
    good = ~small & ~bad
    H[good] = val[good]
    return H, bad


def _interp_gamma(gamma, xs, n):
    """Skewness at the fractional split points ``n * xs`` (linear in t)."""
    gamma = np.asarray(gamma, dtype=float)
    t = np.arange(gamma.size)
    ok = np.isfinite(gamma)
    if not ok.any():
        raise InputError("skewness profile has no finite values")
    return np.interp(n * xs, t[ok], gamma[ok])


def _one_sided(b, n, xs, wts, h, gamma=None):
    inner = h * nu(b * np.sqrt(2 * h / n))
    bad = 0
    if gamma is not None:
        H, mask = skew_factor(b, gamma)
        inner = inner * H
        bad = int(mask.sum())
    return float(b * norm.pdf(b) * np.sum(wts * inner)), bad


def _clip(p):
    return float(min(1.0, max(0.0, p)))


def pvalue_single(statistic, b, n, n0, n1, gamma_w=None, gamma_d=None, panels=1024):
    """Approximate ``P(max_{n0<=t<=n1} stat(t) > b)`` under the permutation null.

    Parameters
    ----------
    statistic : {"Zw", "Zd-abs", "M", "S"}
    b : float
        Threshold; on the chi-square-like scale for ``S``.
    gamma_w, gamma_d : array-like, optional
        Skewness profiles indexed by ``t`` (length at least ``n1 + 1``). When
        given, the marginal crossing probabilities are skewness corrected;
        points where the correction is undefined fall back to no correction
        and are counted in ``inapplicable``.
    panels : int
        Simpson panels per axis.
    """
    if statistic not in TAIL_STATISTICS:
        raise ConfigError(f"unknown statistic {statistic!r}")
    if not b > 0:
        raise InputError("threshold b must be positive")
    skewed = gamma_w is not None or gamma_d is not None
    if statistic == "S":
        if skewed:
            raise ConfigError("the generalized statistic is never skewness corrected")
        return ApproxPValue(_clip(_pvalue_s(b, n, n0, n1, panels)))
    xs, wts = _grid(n, n0, n1, panels)
    need_w = statistic in ("Zw", "M")
    need_d = statistic in ("Zd-abs", "M")
    if skewed and ((need_w and gamma_w is None) or (need_d and gamma_d is None)):
        raise InputError("missing skewness profile")
    bad = 0
    pw = pd = 0.0
    if need_w:
        g = _interp_gamma(gamma_w, xs, n) if skewed else None
        pw, k = _one_sided(b, n, xs, wts, h_w(n, xs), g)
        pw = _clip(pw)
        bad += k
    if need_d:
        hd = h_d(n, xs)
        if skewed:
            g = _interp_gamma(gamma_d, xs, n)
            up, k1 = _one_sided(b, n, xs, wts, hd, g)
            down, k2 = _one_sided(b, n, xs, wts, hd, -g)
            pd, k = up + down, k1 + k2
        else:
            one, k = _one_sided(b, n, xs, wts, hd)
            pd = 2 * one
        pd = _clip(pd)
        bad += k
    if statistic == "Zw":
        p = pw
    elif statistic == "Zd-abs":
        p = pd
    else:
        p = 1 - (1 - pd) * (1 - pw)
    return ApproxPValue(_clip(p), "skewness" if skewed else "none", bad)


def pvalue_single_skewcorrected(statistic, b, n, n0, n1, gamma_w, gamma_d, panels=1024):
    """Skewness-corrected variant of :func:`pvalue_single`; profiles are required."""
    if gamma_w is None or gamma_d is None:
        raise InputError("missing skewness profile")
    return pvalue_single(statistic, b, n, n0, n1, gamma_w, gamma_d, panels)


def _pvalue_s(b, n, n0, n1, panels):
    xs, wx = _grid(n, n0, n1, panels)
    ang = np.linspace(0, 2 * np.pi, panels + 1)
    wa = _simpson_weights(panels) * (ang[1] - ang[0])
    hs = h_d(n, xs)[None, :] * np.cos(ang)[:, None] ** 2 + h_w(n, xs)[None, :] * np.sin(ang)[:, None] ** 2
    inner = hs * nu(np.sqrt(2 * b * hs / n))
    integral = np.sum(wa[:, None] * wx[None, :] * inner)
    return b * np.exp(-b / 2) / (2 * np.pi) * integral


def critical_value(statistic, alpha, n, n0, n1, gamma_w=None, gamma_d=None, panels=1024, bracket=None):
    """Threshold ``b`` with approximate tail probability ``alpha`` (bisection)."""
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    lo, hi = bracket or ((1.0, 50.0) if statistic == "S" else (0.5, 10.0))

    def p(b):
        return pvalue_single(statistic, b, n, n0, n1, gamma_w, gamma_d, panels).value

    plo, phi = p(lo), p(hi)
    if not plo >= alpha >= phi:
        raise InputError(f"alpha={alpha} not bracketed: p({lo})={plo:.3g}, p({hi})={phi:.3g}")
    while hi - lo >= 1e-3:
        mid = 0.5 * (lo + hi)
        pm = p(mid)
        if abs(pm - alpha) < 1e-4:
            return mid
        if pm > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
