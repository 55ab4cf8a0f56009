"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_float_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting NaN/inf and higher dims."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_positive(value: float, name: str) -> float:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)


def check_non_negative(value: float, name: str) -> float:
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")
    return float(value)


def check_probability(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_same_length(a, b, name_a: str = "a", name_b: str = "b") -> None:
    if len(a) != len(b):
        raise ValueError(
            f"{name_a} and {name_b} must have equal length ({len(a)} != {len(b)})"
        )


def check_choice(value, name: str, choices) -> None:
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
