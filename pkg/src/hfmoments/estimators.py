"""Scikit-learn compatible wrappers around the functional core.

These let the tick-to-moments feature extraction and the predictive
regression compose with ``sklearn.pipeline.Pipeline``, ``clone`` and
``get_params``/``set_params``. The transformers are stateless (``fit`` is
a no-op); the regression estimator exposes its inference as fitted
attributes in the usual trailing-underscore convention.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin

from . import panel as panel_mod
from .moments import PreAvgConfig, bipower_variation, naive_moments, preavg_moments
from .regression import RegressionSpec, ols_fit, stepwise_aic
from .ticks import (
    CleanConfig,
    GridPath,
    TickSeries,
    clean_ticks,
    hms_to_seconds,
    resample,
)


def _is_sequence(X) -> bool:
    return isinstance(X, (list, tuple))


def _as_frame(X) -> pd.DataFrame:
    if isinstance(X, pd.DataFrame):
        return X
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    return pd.DataFrame(X, columns=[f"x{i}" for i in range(X.shape[1])])


class TickCleaner(BaseEstimator, TransformerMixin):
    """Apply the five-step trade-cleaning procedure to tick series."""

    def __init__(
        self,
        session_open: str = "10:00:00",
        session_close: str = "15:30:00",
        exchange_open: str = "09:30:00",
        exchange_close: str = "16:00:00",
        outlier_window: int = 5,
        outlier_multiplier: float = 3.0,
    ):
        self.session_open = session_open
        self.session_close = session_close
        self.exchange_open = exchange_open
        self.exchange_close = exchange_close
        self.outlier_window = outlier_window
        self.outlier_multiplier = outlier_multiplier

    def _config(self) -> CleanConfig:
        return CleanConfig(
            exchange_open=hms_to_seconds(self.exchange_open),
            exchange_close=hms_to_seconds(self.exchange_close),
            session_open=hms_to_seconds(self.session_open),
            session_close=hms_to_seconds(self.session_close),
            outlier_window=self.outlier_window,
            outlier_multiplier=self.outlier_multiplier,
        )

    def fit(self, X, y=None):
        self._config()  # validate parameters
        return self

    def transform(self, X):
        cfg = self._config()
        if _is_sequence(X):
            return [clean_ticks(series, cfg) for series in X]
        if not isinstance(X, TickSeries):
            raise TypeError("expected a TickSeries or a sequence of them")
        return clean_ticks(X, cfg)


class PreviousTickResampler(BaseEstimator, TransformerMixin):
    """Previous-tick sample cleaned days onto an equidistant log-price grid."""

    def __init__(self, delta: float = 60.0):
        self.delta = delta

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if _is_sequence(X):
            return [resample(series, self.delta) for series in X]
        return resample(X, self.delta)


class RealizedMomentsTransformer(BaseEstimator, TransformerMixin):
    """Turn grid paths into a feature frame of realized daily measures.

    ``estimator`` selects the naive power sums or the noise-robust
    pre-averaging variant (block length ``block_length``, weight ``weight``).
    Output columns follow the daily-record schema (minus date/returns).
    """

    def __init__(
        self,
        estimator: str = "naive",
        block_length: int = 10,
        weight: str = "min(x,1-x)",
        include_bipower: bool = True,
    ):
        self.estimator = estimator
        self.block_length = block_length
        self.weight = weight
        self.include_bipower = include_bipower

    def fit(self, X, y=None):
        if self.estimator not in ("naive", "preavg"):
            raise ValueError("estimator must be 'naive' or 'preavg'")
        return self

    def _one(self, path: GridPath) -> dict:
        if self.estimator == "preavg":
            mom = preavg_moments(
                path, PreAvgConfig(k_n=self.block_length, weight=self.weight)
            )
        else:
            mom = naive_moments(path)
        row = {
            "rvar": mom.rvar,
            "rskew": mom.rskew,
            "rkurt": mom.rkurt,
            "nrskew": np.nan if mom.nrskew is None else mom.nrskew,
            "nrkurt": np.nan if mom.nrkurt is None else mom.nrkurt,
            "sqrt_rkurt": np.sqrt(mom.rkurt),
        }
        if self.include_bipower:
            row["bipower"] = bipower_variation(path)
        return row

    def transform(self, X) -> pd.DataFrame:
        if self.estimator not in ("naive", "preavg"):
            raise ValueError("estimator must be 'naive' or 'preavg'")
        paths = X if _is_sequence(X) else [X]
        rows = [self._one(path) for path in paths]
        return pd.DataFrame(rows, index=[p.date for p in paths])


class PredictiveOLS(BaseEstimator, RegressorMixin):
    """Least squares with classical t/F inference as fitted attributes.

    Accepts a DataFrame (column names preserved) or a 2-D array. After
    ``fit``: ``coef_``, ``intercept_``, ``std_errors_``, ``t_values_``,
    ``p_values_`` (regressors only, intercept separate), ``r_squared_``,
    ``f_pvalue_``, ``aic_``, ``residuals_``, ``feature_names_in_``.
    """

    def __init__(self, fit_intercept: bool = True):
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        frame = _as_frame(X).copy()
        names = list(frame.columns)
        frame["__y__"] = np.asarray(y, dtype=float)
        spec = RegressionSpec(
            "__y__", tuple(names), include_intercept=self.fit_intercept
        )
        result = ols_fit(spec, frame)
        offset = 1 if self.fit_intercept else 0
        self.feature_names_in_ = np.asarray(names, dtype=object)
        self.n_features_in_ = len(names)
        self.intercept_ = float(result.coefficients[0]) if self.fit_intercept else 0.0
        self.coef_ = result.coefficients[offset:]
        self.std_errors_ = result.std_errors[offset:]
        self.t_values_ = result.t_stats[offset:]
        self.p_values_ = result.p_values[offset:]
        self.r_squared_ = result.r_squared
        self.f_pvalue_ = result.f_p_value
        self.aic_ = result.aic
        self.residuals_ = result.residuals
        self.result_ = result
        return self

    def predict(self, X):
        frame = _as_frame(X)
        x = frame[list(self.feature_names_in_)].to_numpy(dtype=float)
        return x @ self.coef_ + self.intercept_


class StepwiseAICSelector(BaseEstimator):
    """Bidirectional stepwise-AIC regressor selection over named columns.

    After ``fit``: ``selected_`` (tuple of kept column names), ``support_``
    (boolean mask in input order), and ``token_`` (the ``+``-joined summary
    label, ``"1"`` when the intercept-only model wins).
    """

    def fit(self, X, y):
        frame = _as_frame(X).copy()
        names = list(frame.columns)
        frame["__y__"] = np.asarray(y, dtype=float)
        spec = stepwise_aic(names, "__y__", frame)
        self.feature_names_in_ = np.asarray(names, dtype=object)
        self.selected_ = spec.regressors
        self.support_ = np.asarray([n in spec.regressors for n in names])
        self.token_ = panel_mod.selection_token(spec)
        return self

    def transform(self, X):
        return _as_frame(X)[list(self.selected_)]
