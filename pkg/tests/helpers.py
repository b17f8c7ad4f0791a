"""Shared statistical test utilities (independent of the library under test)."""

import math

import numpy as np


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against an exact CDF callable."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    f = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max((i / n - f).max(), (f - (i - 1) / n).max()))


def ks_critical(n: int, significance: float) -> float:
    """Asymptotic one-sample KS critical value: P(D_n > c) ~ 2 exp(-2 n c^2)."""
    return math.sqrt(math.log(2.0 / significance) / (2.0 * n))


def chi2_statistic(counts: np.ndarray, expected: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    return float(((counts - expected) ** 2 / expected).sum())
