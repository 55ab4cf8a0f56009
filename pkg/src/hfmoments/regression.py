"""Ordinary least squares with t/F inference, AIC, and stepwise selection.

Estimation uses a QR-based solve; standard errors come from the classical
covariance ``sigma2 * inv(X'X)`` with exact Student-t and F reference
distributions. AIC follows the Gaussian-likelihood form
``n * log(RSS / n) + 2k`` with ``k`` counting every estimated coefficient,
intercept included.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats as sps

INTERCEPT = "const"


@dataclass(frozen=True)
class RegressionSpec:
    """Response/regressor column names, forecast horizon, intercept flag."""

    response: str
    regressors: tuple[str, ...] = ()
    horizon: int = 1
    include_intercept: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.regressors and not self.include_intercept:
            raise ValueError("model must have regressors or an intercept")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValueError("duplicate regressor names")


@dataclass
class RegressionResult:
    """Coefficient table plus fit statistics for one OLS fit.

    ``names`` lists the design columns in order (intercept first when
    present); the per-coefficient arrays are aligned with it. ``f_stat``
    and ``f_p_value`` are ``None`` for an intercept-only model.
    """

    names: list[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    f_stat: float | None
    f_p_value: float | None
    aic: float
    residuals: np.ndarray
    n_obs: int
    n_params: int
    rss: float = field(repr=False, default=0.0)

    def __getitem__(self, name: str) -> dict[str, float]:
        i = self.names.index(name)
        return {
            "estimate": float(self.coefficients[i]),
            "std_error": float(self.std_errors[i]),
            "t_stat": float(self.t_stats[i]),
            "p_value": float(self.p_values[i]),
        }

    def predict(self, panel) -> np.ndarray:
        X = _design_matrix(panel, self.names)
        return X @ self.coefficients


def _column(panel, name: str) -> np.ndarray:
    if isinstance(panel, pd.DataFrame):
        if name not in panel.columns:
            raise KeyError(f"panel has no column {name!r}")
        return panel[name].to_numpy(dtype=float)
    try:
        return np.asarray(panel[name], dtype=float)
    except Exception as exc:
        raise KeyError(f"panel has no column {name!r}") from exc


def _design_matrix(panel, names: list[str]) -> np.ndarray:
    cols = []
    for name in names:
        if name == INTERCEPT:
            continue
        cols.append(_column(panel, name))
    length = len(cols[0]) if cols else len(_any_column(panel))
    X = np.empty((length, len(names)))
    j = 0
    for name in names:
        X[:, j] = 1.0 if name == INTERCEPT else cols.pop(0)
        j += 1
    return X


def _any_column(panel) -> np.ndarray:
    if isinstance(panel, pd.DataFrame):
        return panel.iloc[:, 0].to_numpy(dtype=float)
    first = next(iter(panel.values()))
    return np.asarray(first, dtype=float)


def _collinear_columns(X: np.ndarray, names: list[str]) -> list[str]:
    """Columns lying (numerically) in the span of the columns before them."""
    bad = []
    for j in range(1, X.shape[1]):
        prev = X[:, :j]
        target = X[:, j]
        fitted = prev @ np.linalg.lstsq(prev, target, rcond=None)[0]
        scale = np.linalg.norm(target) or 1.0
        if np.linalg.norm(target - fitted) < 1e-8 * scale:
            bad.append(names[j])
    return bad


def ols_fit(spec: RegressionSpec, panel) -> RegressionResult:
    """Fit ``spec`` on aligned columns and return coefficients with inference.

    ``panel`` is a DataFrame or a mapping of equal-length float arrays with
    no missing values. Raises on rank deficiency (naming the collinear
    columns) and when observations do not exceed parameters.
    """
    y = _column(panel, spec.response)
    names = ([INTERCEPT] if spec.include_intercept else []) + list(spec.regressors)
    X = _design_matrix(panel, names)
    n, k = X.shape
    if n <= k:
        raise ValueError(f"need more observations than parameters ({n} <= {k})")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("panel contains missing or non-finite values")

    if np.linalg.matrix_rank(X) < k:
        bad = _collinear_columns(X, names)
        raise ValueError(f"rank-deficient design; collinear columns: {bad}")

    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ beta
    rss = float(residuals @ residuals)
    dof = n - k
    sigma2 = rss / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    std_errors = np.sqrt(sigma2 * np.diag(xtx_inv))
    t_stats = np.divide(
        beta, std_errors, out=np.zeros_like(beta), where=std_errors > 0
    )
    t_stats[(std_errors == 0) & (beta > 0)] = np.inf
    t_stats[(std_errors == 0) & (beta < 0)] = -np.inf
    p_values = 2.0 * sps.t.sf(np.abs(t_stats), dof)

    if spec.include_intercept:
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0
    r_squared = min(max(r_squared, 0.0), 1.0)

    q = k - (1 if spec.include_intercept else 0)
    if q > 0 and rss > 0:
        f_stat = (tss - rss) / q / sigma2
        f_p_value = float(sps.f.sf(f_stat, q, dof))
        f_stat = float(f_stat)
    elif q > 0:
        f_stat, f_p_value = np.inf, 0.0
    else:
        f_stat = f_p_value = None

    aic = n * np.log(rss / n) + 2 * k if rss > 0 else -np.inf

    return RegressionResult(
        names=names,
        coefficients=beta,
        std_errors=std_errors,
        t_stats=t_stats,
        p_values=np.clip(p_values, 0.0, 1.0),
        r_squared=float(r_squared),
        f_stat=f_stat,
        f_p_value=f_p_value,
        aic=float(aic),
        residuals=residuals,
        n_obs=n,
        n_params=k,
        rss=rss,
    )


def stepwise_aic(candidates, response: str, panel, horizon: int = 1) -> RegressionSpec:
    """Bidirectional stepwise search minimizing AIC, starting from the full model.

    Each round scores every single-regressor removal and re-addition and
    takes the move with the strictly lowest AIC; the search stops at a local
    minimum. Ties break toward the earlier move in candidate-list order
    (removals scanned before additions).
    """
    candidates = list(candidates)
    current = list(candidates)
    spec = RegressionSpec(response, tuple(current), horizon)
    best_aic = ols_fit(spec, panel).aic

    while True:
        moves = []  # (aic, order, resulting regressor list)
        order = 0
        for name in candidates:
            if name not in current:
                continue
            trial = [c for c in current if c != name]
            aic = ols_fit(RegressionSpec(response, tuple(trial), horizon), panel).aic
            moves.append((aic, order, trial))
            order += 1
        for name in candidates:
            if name in current:
                continue
            trial = current + [name]
            aic = ols_fit(RegressionSpec(response, tuple(trial), horizon), panel).aic
            moves.append((aic, order, trial))
            order += 1
        if not moves:
            break
        aic, _, trial = min(moves, key=lambda m: (m[0], m[1]))
        if aic < best_aic:
            best_aic = aic
            current = trial
        else:
            break

    ordered = tuple(c for c in candidates if c in current)
    return RegressionSpec(response, ordered, horizon)
