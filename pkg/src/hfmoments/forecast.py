"""Out-of-sample forecast comparison metrics for nested models."""

from __future__ import annotations

import numpy as np

from .diagnostics import TestResult
from .validation import as_float_vector, check_same_length

# Upper percentiles (90/95/99) of the encompassing statistic's null
# distribution for one extra predictor, taken as fixed configuration.
CM_CRITICAL_VALUES: tuple[tuple[float, str], ...] = (
    (1.300, "0.99"),
    (0.698, "0.95"),
    (0.449, "0.90"),
)


def normalized_mse(predictions, truths) -> float:
    """Squared forecast error sum divided by the squared-truth sum."""
    pred = as_float_vector(predictions, "predictions")
    true = as_float_vector(truths, "truths")
    check_same_length(pred, true, "predictions", "truths")
    if len(true) == 0:
        raise ValueError("empty forecast window")
    denom = float(true @ true)
    if denom == 0:
        raise ValueError("truths are identically zero")
    err = pred - true
    return float(err @ err) / denom


def cm_encompassing(errors_small, errors_large) -> TestResult:
    """Encompassing statistic for a pair of nested forecasting models.

    ``errors_small`` are forecast errors of the restricted model,
    ``errors_large`` of the model with the extra regressor(s). The statistic
    is ``P * mean(e1^2 - e1*e2) / mean(e2^2)``; large values favor the
    larger model. ``decision_level`` reports the highest tabulated
    percentile whose critical value the statistic weakly exceeds.
    """
    e1 = as_float_vector(errors_small, "errors_small")
    e2 = as_float_vector(errors_large, "errors_large")
    check_same_length(e1, e2, "errors_small", "errors_large")
    p = len(e1)
    if p < 2:
        raise ValueError("need at least 2 forecast errors")
    sigma2 = float(np.mean(e2**2))
    if sigma2 == 0:
        raise ValueError("degenerate unrestricted errors")
    cbar = float(np.mean(e1**2 - e1 * e2))
    stat = p * cbar / sigma2
    level = None
    for cv, label in CM_CRITICAL_VALUES:
        if stat >= cv:
            level = label
            break
    return TestResult(statistic=float(stat), p_value=None, decision_level=level)
