"""Realized higher-moment estimation from tick data and the regression
pipeline that forecasts daily variance from them."""

from .diagnostics import TestResult, dagostino_skewness, ljung_box, significance_code
from .estimators import (
    PredictiveOLS,
    PreviousTickResampler,
    RealizedMomentsTransformer,
    StepwiseAICSelector,
    TickCleaner,
)
from .forecast import CM_CRITICAL_VALUES, cm_encompassing, normalized_mse
from .moments import (
    PreAvgConfig,
    RealizedMoments,
    bipower_variation,
    gbar,
    naive_moments,
    normalize_moments,
    preavg_moments,
    preavg_returns,
)
from .panel import (
    DailyRecord,
    ModelCatalogEntry,
    MODEL_CATALOG,
    OosResult,
    OosSplit,
    align_model,
    catalog_entry,
    compute_panel,
    fit_model,
    oos_evaluate,
    read_records_csv,
    read_tick_file,
    records_to_frame,
    select_covariates,
    write_records_csv,
)
from .regression import RegressionResult, RegressionSpec, ols_fit, stepwise_aic
from .simulate import (
    PlantedConfig,
    SimConfig,
    SimDay,
    simulate_day,
    simulate_panel,
    simulate_planted_panel,
    theoretical_limits,
)
from .ticks import (
    CleanConfig,
    GridPath,
    TickRecord,
    TickSeries,
    clean_ticks,
    daily_return,
    daily_volume,
    parse_ticks,
    resample,
)

__version__ = "0.1.0"

__all__ = [
    "CleanConfig",
    "CM_CRITICAL_VALUES",
    "DailyRecord",
    "GridPath",
    "ModelCatalogEntry",
    "MODEL_CATALOG",
    "OosResult",
    "OosSplit",
    "PlantedConfig",
    "PreAvgConfig",
    "PredictiveOLS",
    "PreviousTickResampler",
    "RealizedMoments",
    "RealizedMomentsTransformer",
    "RegressionResult",
    "RegressionSpec",
    "SimConfig",
    "SimDay",
    "StepwiseAICSelector",
    "TestResult",
    "TickCleaner",
    "TickRecord",
    "TickSeries",
    "align_model",
    "bipower_variation",
    "catalog_entry",
    "clean_ticks",
    "cm_encompassing",
    "compute_panel",
    "dagostino_skewness",
    "daily_return",
    "daily_volume",
    "fit_model",
    "gbar",
    "ljung_box",
    "naive_moments",
    "normalize_moments",
    "normalized_mse",
    "ols_fit",
    "oos_evaluate",
    "parse_ticks",
    "preavg_moments",
    "preavg_returns",
    "read_records_csv",
    "read_tick_file",
    "records_to_frame",
    "resample",
    "select_covariates",
    "significance_code",
    "simulate_day",
    "simulate_panel",
    "simulate_planted_panel",
    "stepwise_aic",
    "theoretical_limits",
    "write_records_csv",
]
