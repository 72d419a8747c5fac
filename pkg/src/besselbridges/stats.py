"""Goodness-of-fit statistics and reference CDFs for the samplers."""

import math

import numpy as np
from scipy import special

__all__ = [
    "ks_statistic",
    "ks_critical_value",
    "gamma_cdf",
    "folded_normal_cdf",
    "normal_cdf",
    "integrated_autocorr_time",
]


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / n))
    return float(max(d_plus, d_minus))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Critical KS value at level alpha (Stephens' small-sample correction)."""
    c = math.sqrt(-0.5 * math.log(0.5 * alpha))
    return c / (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n))


def gamma_cdf(x, shape: float, rate: float):
    """CDF of the Gamma(shape, rate) law; shape = 0 degenerates to delta_0."""
    x = np.asarray(x, dtype=float)
    if shape == 0.0:
        return (x >= 0.0).astype(float)
    return special.gammainc(shape, rate * np.maximum(x, 0.0))


def folded_normal_cdf(x, sigma: float):
    """CDF of |Z| with Z ~ N(0, sigma^2)."""
    x = np.asarray(x, dtype=float)
    return special.erf(np.maximum(x, 0.0) / (sigma * math.sqrt(2.0)))


def normal_cdf(x, sigma: float):
    x = np.asarray(x, dtype=float)
    return 0.5 * (1.0 + special.erf(x / (sigma * math.sqrt(2.0))))


def integrated_autocorr_time(series, max_lag: int = None) -> float:
    """Integrated autocorrelation time via the initial-positive-sum estimator.

    Returns 0.5 for white noise; the effective sample size of n correlated
    draws is roughly n / (2 tau).
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("series too short for an autocorrelation estimate")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return 0.5
    if max_lag is None:
        max_lag = min(n // 4, 2000)
    tau = 0.5
    for lag in range(1, max_lag):
        rho = float(np.dot(x[:-lag], x[lag:])) / ((n - lag) * var)
        if rho <= 0.0:
            break
        tau += rho
    return tau
