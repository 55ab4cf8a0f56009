"""Daily-record construction, the regression model catalog, horizon
alignment, out-of-sample evaluation, covariate selection, and batch
reporting. This is the engine behind the command-line pipeline."""

from __future__ import annotations

import csv
import logging
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from .diagnostics import ljung_box, significance_code
from .forecast import CM_CRITICAL_VALUES, cm_encompassing, normalized_mse
from .moments import PreAvgConfig, bipower_variation, naive_moments, preavg_moments
from .regression import RegressionResult, RegressionSpec, ols_fit, stepwise_aic
from .ticks import (
    CleanConfig,
    TickSeries,
    clean_ticks,
    closing_price,
    daily_return,
    daily_volume,
    parse_ticks,
    resample,
)

logger = logging.getLogger(__name__)

RECORD_COLUMNS = [
    "date",
    "dret",
    "dret_pos",
    "dret_neg",
    "rvar",
    "rskew",
    "rkurt",
    "nrskew",
    "nrkurt",
    "sqrt_rkurt",
    "bipower",
    "tvol",
]

NAIVE_DELTA = 300.0
PREAVG_DELTA = 60.0

SELECTION_CANDIDATES = ["dret_pos", "dret_neg", "rskew", "rkurt", "tvol"]
_TOKEN_NAMES = {
    "dret_pos": "dret^+",
    "dret_neg": "dret^-",
    "rskew": "rskew",
    "rkurt": "rkurt",
    "sqrt_rkurt": "rkurt",
    "tvol": "tvol",
}
REPORT_CONTEXTS = (
    ("dret&rskew", "21"),
    ("tvol", "24"),
    ("dret^+&dret^-", "26"),
    ("all", "27"),
)


@dataclass(frozen=True)
class DailyRecord:
    """One regression-panel row of daily measures.

    ``dret`` is ``None`` on the first day of a panel; ``nrskew``/``nrkurt``
    are ``None`` whenever the variance estimate was not positive.
    """

    date: str
    dret: float | None
    rvar: float
    rskew: float
    rkurt: float
    nrskew: float | None
    nrkurt: float | None
    bipower: float
    tvol: float

    @property
    def dret_pos(self) -> float | None:
        return None if self.dret is None else max(self.dret, 0.0)

    @property
    def dret_neg(self) -> float | None:
        return None if self.dret is None else min(self.dret, 0.0)

    @property
    def sqrt_rkurt(self) -> float:
        return math.sqrt(self.rkurt)

    def as_row(self) -> list:
        return [
            self.date,
            self.dret,
            self.dret_pos,
            self.dret_neg,
            self.rvar,
            self.rskew,
            self.rkurt,
            self.nrskew,
            self.nrkurt,
            self.sqrt_rkurt,
            self.bipower,
            self.tvol,
        ]


def compute_record(
    clean: TickSeries,
    prev_close: float | None,
    estimator: str = "naive",
    preavg_cfg: PreAvgConfig | None = None,
    clean_cfg: CleanConfig | None = None,
    naive_delta: float = NAIVE_DELTA,
    preavg_delta: float = PREAVG_DELTA,
) -> tuple[DailyRecord, float]:
    """Daily measures for one cleaned day; returns the record and the close.

    The naive estimator runs on the coarse grid; pre-averaging runs on the
    fine grid. Bipower variation and trading volume always come from the
    coarse naive grid and the cleaned session, respectively.
    """
    clean_cfg = clean_cfg or CleanConfig()
    coarse = resample(clean, naive_delta, clean_cfg)
    if estimator == "naive":
        mom = naive_moments(coarse)
    elif estimator == "preavg":
        fine = resample(clean, preavg_delta, clean_cfg)
        mom = preavg_moments(fine, preavg_cfg or PreAvgConfig())
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    close = closing_price(clean, clean_cfg)
    dret = None if prev_close is None else daily_return(close, prev_close)
    record = DailyRecord(
        date=clean.date,
        dret=dret,
        rvar=mom.rvar,
        rskew=mom.rskew,
        rkurt=mom.rkurt,
        nrskew=mom.nrskew,
        nrkurt=mom.nrkurt,
        bipower=bipower_variation(coarse),
        tvol=daily_volume(clean),
    )
    return record, close


def compute_panel(
    days: Iterable[TickSeries],
    estimator: str = "naive",
    preavg_cfg: PreAvgConfig | None = None,
    clean_cfg: CleanConfig | None = None,
    naive_delta: float = NAIVE_DELTA,
    preavg_delta: float = PREAVG_DELTA,
) -> list[DailyRecord]:
    """Clean each day and compute its record; days failing to produce a
    usable session are logged and skipped."""
    clean_cfg = clean_cfg or CleanConfig()
    records: list[DailyRecord] = []
    prev_close: float | None = None
    for raw in days:
        clean = clean_ticks(raw, clean_cfg)
        try:
            record, close = compute_record(
                clean, prev_close, estimator, preavg_cfg, clean_cfg,
                naive_delta, preavg_delta,
            )
        except ValueError as exc:
            logger.warning("skipping %s %s: %s", raw.symbol, raw.date, exc)
            continue
        records.append(record)
        prev_close = close
    if not records:
        raise ValueError("no usable days in panel")
    return records


def read_tick_file(path: str) -> TickSeries:
    """Parse a ``<SYMBOL>_<YYYY-MM-DD>.csv`` trade file."""
    name = os.path.basename(path)
    match = re.match(r"(?P<symbol>.+)_(?P<date>\d{4}-\d{2}-\d{2})\.csv$", name)
    if not match:
        raise ValueError(f"tick filename must look like SYMBOL_YYYY-MM-DD.csv: {name}")
    with open(path, "r", newline="") as fh:
        return parse_ticks(fh, match["symbol"], match["date"])


def records_to_frame(records: list[DailyRecord]) -> pd.DataFrame:
    """Panel DataFrame with ``None`` rendered as NaN."""
    rows = [record.as_row() for record in records]
    frame = pd.DataFrame(rows, columns=RECORD_COLUMNS)
    for col in RECORD_COLUMNS[1:]:
        frame[col] = pd.to_numeric(frame[col])
    return frame


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)  # numpy scalars repr as np.float64(...)
        return "" if math.isnan(value) else repr(value)
    return str(value)


def write_records_csv(records: list[DailyRecord], path: str) -> None:
    """Record CSV with missing values as empty fields and floats as their
    shortest round-trip decimals."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for record in records:
            writer.writerow([_format_value(v) for v in record.as_row()])


def read_records_csv(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"date": str}, float_precision="round_trip")
    missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"records file {path} lacks columns {missing}")
    return frame


@dataclass(frozen=True)
class ModelCatalogEntry:
    """One regression specification from the model catalog."""

    model_id: str
    response: str
    regressors: tuple[str, ...]
    horizon: int = 1


_BASE_CATALOG: tuple[ModelCatalogEntry, ...] = (
    ModelCatalogEntry("19", "dret", ("rvar", "rskew", "rkurt")),
    ModelCatalogEntry("20", "dret", ("rvar", "nrskew", "nrkurt")),
    ModelCatalogEntry("21", "rvar", ("dret", "rskew", "rkurt")),
    ModelCatalogEntry("22", "rvar", ("dret", "nrskew", "nrkurt")),
    ModelCatalogEntry("23", "rvar", ("tvol",)),
    ModelCatalogEntry("24", "rvar", ("tvol", "rkurt")),
    ModelCatalogEntry("25", "rvar", ("dret_pos", "dret_neg")),
    ModelCatalogEntry("26", "rvar", ("dret_pos", "dret_neg", "rkurt")),
    ModelCatalogEntry("27", "rvar", ("rkurt", "tvol", "dret_pos", "dret_neg")),
    ModelCatalogEntry("28", "rvar", ("dret", "rskew")),
    ModelCatalogEntry("29", "rvar", ("tvol",)),
    ModelCatalogEntry("30", "rvar", ("dret_pos", "dret_neg")),
    ModelCatalogEntry("31", "rvar", ("dret", "rskew", "rkurt")),
    ModelCatalogEntry("32", "rvar", ("tvol", "rkurt")),
    ModelCatalogEntry("33", "rvar", ("dret_pos", "dret_neg", "rkurt")),
    ModelCatalogEntry("34", "rvar", ("rvar",)),
    ModelCatalogEntry("35", "rvar", ("rvar", "rkurt")),
    ModelCatalogEntry(
        "34L5", "rvar", ("rvar", "rvar_lag1", "rvar_lag2", "rvar_lag3", "rvar_lag4")
    ),
    ModelCatalogEntry(
        "35L5",
        "rvar",
        ("rvar", "rvar_lag1", "rvar_lag2", "rvar_lag3", "rvar_lag4", "rkurt"),
    ),
)

MODEL_CATALOG: dict[str, ModelCatalogEntry] = {e.model_id: e for e in _BASE_CATALOG}


def catalog_entry(
    model_id: str,
    horizon: int | None = None,
    kurtosis_form: str = "rkurt",
    response_form: str = "rvar",
) -> ModelCatalogEntry:
    """Catalog lookup with the kurtosis-form and response-form variants.

    ``kurtosis_form="sqrt_rkurt"`` swaps the kurtosis regressor for its
    square root; ``response_form="bipower"`` retargets variance models (and
    their variance lags) onto bipower variation.
    """
    if model_id not in MODEL_CATALOG:
        raise KeyError(f"unknown model {model_id!r}")
    if kurtosis_form not in ("rkurt", "sqrt_rkurt"):
        raise ValueError("kurtosis_form must be 'rkurt' or 'sqrt_rkurt'")
    if response_form not in ("rvar", "bipower"):
        raise ValueError("response_form must be 'rvar' or 'bipower'")
    entry = MODEL_CATALOG[model_id]
    response = entry.response
    regressors = list(entry.regressors)
    if kurtosis_form == "sqrt_rkurt":
        regressors = [kurtosis_form if r == "rkurt" else r for r in regressors]
    if response_form == "bipower" and entry.response == "rvar":
        response = "bipower"
        regressors = [
            r.replace("rvar", "bipower") if r.startswith("rvar") else r
            for r in regressors
        ]
    return ModelCatalogEntry(
        entry.model_id,
        response,
        tuple(regressors),
        entry.horizon if horizon is None else horizon,
    )


def _with_lags(frame: pd.DataFrame, names: Iterable[str]) -> pd.DataFrame:
    out = frame
    for name in names:
        match = re.fullmatch(r"(?P<base>\w+?)_lag(?P<k>\d+)", name)
        if match and name not in frame.columns:
            if out is frame:
                out = frame.copy()
            out[name] = out[match["base"]].shift(int(match["k"]))
    return out


def response_key(entry: ModelCatalogEntry) -> str:
    """Aligned-frame column holding the horizon-shifted response. A distinct
    name keeps autoregressions (response also a regressor) unambiguous."""
    return f"{entry.response}_lead{entry.horizon}"


def align_model(frame: pd.DataFrame, entry: ModelCatalogEntry) -> pd.DataFrame:
    """Pair the response at ``t + d`` with regressors at ``t`` and drop rows
    with missing values, logging how many were lost to missingness."""
    d = entry.horizon
    if d < 1:
        raise ValueError("horizon must be >= 1")
    if len(frame) <= d:
        raise ValueError(f"panel of {len(frame)} rows cannot align horizon {d}")
    frame = _with_lags(frame, entry.regressors)
    data = {response_key(entry): frame[entry.response].to_numpy(dtype=float)[d:]}
    for name in entry.regressors:
        data[name] = frame[name].to_numpy(dtype=float)[:-d]
    aligned = pd.DataFrame(data, index=frame.index[:-d])
    usable = aligned.dropna()
    dropped = len(aligned) - len(usable)
    if dropped:
        logger.info(
            "model %s: dropped %d of %d aligned rows with missing values",
            entry.model_id, dropped, len(aligned),
        )
    return usable


def fit_model(frame: pd.DataFrame, entry: ModelCatalogEntry) -> RegressionResult:
    aligned = align_model(frame, entry)
    spec = RegressionSpec(response_key(entry), entry.regressors, entry.horizon)
    return ols_fit(spec, aligned)


@dataclass(frozen=True)
class OosSplit:
    """Train/test day counts and the re-estimation scheme."""

    train_len: int = 200
    test_len: int = 40
    scheme: str = "fixed"

    def __post_init__(self) -> None:
        if self.train_len < 2 or self.test_len < 1:
            raise ValueError("train_len must be >= 2 and test_len >= 1")
        if self.scheme not in ("fixed", "recursive"):
            raise ValueError("scheme must be 'fixed' or 'recursive'")


@dataclass
class OosResult:
    """Table-style comparison row for a nested forecasting pair."""

    restricted_id: str
    augmented_id: str
    mse_augmented: float
    mse_restricted: float
    cm_statistic: float
    cm_decision: str | None
    lb_p_restricted: float
    lb_p_augmented: float

    def as_row(self) -> list:
        cvs = sorted(cv for cv, _ in CM_CRITICAL_VALUES)
        return [
            f"({self.augmented_id}) versus ({self.restricted_id})",
            self.mse_augmented,
            self.mse_restricted,
            self.cm_statistic,
            *cvs,
            self.cm_decision or "",
            self.lb_p_restricted,
            self.lb_p_augmented,
        ]


OOS_HEADER = [
    "comparison",
    "mse_1",
    "mse_2",
    "cm_statistic",
    "cv_0.90",
    "cv_0.95",
    "cv_0.99",
    "cm_decision",
    "lb_p_restricted",
    "lb_p_augmented",
]


def oos_evaluate(
    frame: pd.DataFrame,
    restricted: ModelCatalogEntry,
    augmented: ModelCatalogEntry,
    split: OosSplit | None = None,
    lb_lags: int = 10,
) -> OosResult:
    """Fit both nested models on the training window, forecast the test
    window, and compare by normalized MSE and the encompassing statistic."""
    split = split or OosSplit()
    if restricted.response != augmented.response or restricted.horizon != augmented.horizon:
        raise ValueError("models must share response and horizon")
    if not set(restricted.regressors) <= set(augmented.regressors):
        raise ValueError(
            f"model {augmented.model_id} does not nest model {restricted.model_id}"
        )
    if split.train_len + split.test_len > len(frame):
        raise ValueError("train_len + test_len exceeds the panel length")

    d = augmented.horizon
    frame = _with_lags(frame, augmented.regressors)
    test_lo, test_hi = split.train_len, split.train_len + split.test_len

    predictions: dict[str, list[float]] = {"restricted": [], "augmented": []}
    truths: list[float] = []
    if split.scheme == "fixed":
        fits = {
            "restricted": fit_model(frame.iloc[: split.train_len], restricted),
            "augmented": fit_model(frame.iloc[: split.train_len], augmented),
        }
    for s in range(test_lo, test_hi):
        t = s - d
        if t < 0:
            continue
        row = frame.iloc[[t]]
        if split.scheme == "recursive":
            fits = {
                "restricted": fit_model(frame.iloc[:s], restricted),
                "augmented": fit_model(frame.iloc[:s], augmented),
            }
        y = float(frame[augmented.response].iloc[s])
        skip = math.isnan(y)
        preds = {}
        for key, entry in (("restricted", restricted), ("augmented", augmented)):
            x = row[list(entry.regressors)].to_numpy(dtype=float)
            if np.any(np.isnan(x)):
                skip = True
                break
            preds[key] = float(fits[key].predict(row[list(entry.regressors)])[0])
        if skip:
            logger.info("skipping test day %s: missing values", frame["date"].iloc[s]
                        if "date" in frame.columns else s)
            continue
        truths.append(y)
        for key in predictions:
            predictions[key].append(preds[key])

    if len(truths) < 2:
        raise ValueError("fewer than 2 usable forecast days")
    truths_arr = np.asarray(truths)
    e_restricted = truths_arr - np.asarray(predictions["restricted"])
    e_augmented = truths_arr - np.asarray(predictions["augmented"])
    cm = cm_encompassing(e_restricted, e_augmented)
    return OosResult(
        restricted_id=restricted.model_id,
        augmented_id=augmented.model_id,
        mse_augmented=normalized_mse(predictions["augmented"], truths_arr),
        mse_restricted=normalized_mse(predictions["restricted"], truths_arr),
        cm_statistic=cm.statistic,
        cm_decision=cm.decision_level,
        lb_p_restricted=float(ljung_box(e_restricted, lb_lags).p_value),
        lb_p_augmented=float(ljung_box(e_augmented, lb_lags).p_value),
    )


def select_covariates(
    frame: pd.DataFrame,
    response: str = "rvar",
    kurtosis_form: str = "rkurt",
    horizon: int = 1,
) -> tuple[RegressionSpec, str]:
    """Stepwise-AIC covariate choice for next-day variance, with the result
    rendered as a ``+``-joined token string (``"1"`` when nothing is kept)."""
    if response not in ("rvar", "bipower"):
        raise ValueError("response must be 'rvar' or 'bipower'")
    candidates = [
        kurtosis_form if c == "rkurt" else c for c in SELECTION_CANDIDATES
    ]
    entry = ModelCatalogEntry("select", response, tuple(candidates), horizon)
    aligned = align_model(frame, entry)
    spec = stepwise_aic(candidates, response_key(entry), aligned, horizon)
    return spec, selection_token(spec)


def selection_token(spec: RegressionSpec) -> str:
    if not spec.regressors:
        return "1"
    return "+".join(_TOKEN_NAMES.get(r, r) for r in spec.regressors)


def report_symbol(
    frame: pd.DataFrame,
    kurtosis_form: str = "rkurt",
    response_form: str = "rvar",
) -> dict[str, str]:
    """Significance codes of the kurtosis coefficient in the four catalog
    contexts plus the covariate-selection token, for one symbol's panel."""
    kurt_name = kurtosis_form
    out: dict[str, str] = {}
    for label, model_id in REPORT_CONTEXTS:
        entry = catalog_entry(
            model_id, kurtosis_form=kurtosis_form, response_form=response_form
        )
        result = fit_model(frame, entry)
        out[label] = significance_code(result[kurt_name]["p_value"])
    response = "bipower" if response_form == "bipower" else "rvar"
    _, token = select_covariates(frame, response, kurtosis_form)
    out["covariate selection"] = token
    return out


def aggregate_report(
    per_symbol: dict[str, dict[str, str]]
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Summary matrix (one row per symbol) and per-context code counts."""
    if not per_symbol:
        raise ValueError("no symbols to report")
    context_labels = [label for label, _ in REPORT_CONTEXTS]
    columns = ["symbol"] + context_labels + ["covariate selection"]
    rows = [
        [symbol] + [values[c] for c in columns[1:]]
        for symbol, values in sorted(per_symbol.items())
    ]
    summary = pd.DataFrame(rows, columns=columns)
    counts = []
    for label in context_labels:
        for code in ("0", "0.5", "1", "2", "3"):
            count = int((summary[label] == code).sum())
            counts.append([label, code, count])
    return summary, pd.DataFrame(counts, columns=["context", "code", "count"])
