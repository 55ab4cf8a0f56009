"""Serial-correlation and skewness diagnostics, plus p-value bucketing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .validation import as_float_vector, check_probability


@dataclass(frozen=True)
class TestResult:
    """Statistic with an optional p-value and/or significance label."""

    statistic: float
    p_value: float | None = None
    decision_level: str | None = None


def autocorrelations(series: np.ndarray, h: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..h (biased denominator convention)."""
    x = series - series.mean()
    denom = float(x @ x)
    if denom == 0:
        raise ValueError("series has zero variance")
    return np.array([float(x[k:] @ x[:-k]) / denom for k in range(1, h + 1)])


def ljung_box(series, h: int = 10) -> TestResult:
    """Portmanteau test that the first ``h`` autocorrelations are zero.

    ``Q = n (n + 2) * sum_k acf_k^2 / (n - k)`` referred to chi-square(h).
    """
    x = as_float_vector(series, "series")
    n = len(x)
    if h < 1:
        raise ValueError("h must be >= 1")
    if n <= h:
        raise ValueError(f"series length {n} must exceed the lag count {h}")
    rho = autocorrelations(x, h)
    lags = np.arange(1, h + 1)
    q = float(n * (n + 2) * np.sum(rho**2 / (n - lags)))
    return TestResult(statistic=q, p_value=float(sps.chi2.sf(q, h)))


def dagostino_skewness(series) -> TestResult:
    """Two-sided test of zero skewness via the normalizing transformation
    of the sample skewness coefficient (D'Agostino, 1970).

    Requires at least 8 observations and a non-degenerate sample.
    """
    x = as_float_vector(series, "series")
    n = len(x)
    if n < 8:
        raise ValueError("need at least 8 observations")
    d = x - x.mean()
    m2 = float(np.mean(d**2))
    if m2 == 0:
        raise ValueError("series has zero variance")
    b1 = float(np.mean(d**3)) / m2**1.5

    y = b1 * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = (
        3.0
        * (n**2 + 27 * n - 70)
        * (n + 1)
        * (n + 3)
        / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9))
    )
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    z = delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))
    return TestResult(statistic=z, p_value=float(2.0 * sps.norm.sf(abs(z))))


_CODE_EDGES = ((0.1, "0"), (0.05, "0.5"), (0.01, "1"), (0.001, "2"))


def significance_code(p_value: float) -> str:
    """Bucket a p-value into the summary-table codes 0 / 0.5 / 1 / 2 / 3.

    Intervals are closed at their larger-p end: for instance p = 0.05 maps
    to "0.5" and p = 0.01 to "1".
    """
    p = check_probability(float(p_value), "p_value")
    for edge, code in _CODE_EDGES:
        if p >= edge:
            return code
    return "3"
