"""Command-line pipeline: simulate tick data, compute daily records, run
the regression catalog in- and out-of-sample, select covariates, and emit
summary tables.

All outputs are plain CSV; identical inputs and configuration produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import math
import os
import sys
from collections import defaultdict

import numpy as np

from .diagnostics import significance_code
from .moments import PreAvgConfig
from .panel import (
    MODEL_CATALOG,
    NAIVE_DELTA,
    OOS_HEADER,
    PREAVG_DELTA,
    OosSplit,
    aggregate_report,
    catalog_entry,
    compute_panel,
    fit_model,
    oos_evaluate,
    read_records_csv,
    read_tick_file,
    report_symbol,
    select_covariates,
    write_records_csv,
)
from .simulate import SimConfig, simulate_panel
from .ticks import CleanConfig, hms_to_seconds

logger = logging.getLogger("hfmoments")

RESULTS_HEADER = [
    "model_id",
    "horizon",
    "regressor",
    "estimate",
    "std_error",
    "p_value",
    "code",
    "r_squared",
    "f_p_value",
    "aic",
    "n_obs",
]


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def clean_config(cfg: dict) -> CleanConfig:
    section = dict(cfg.get("clean", {}))
    for key in ("exchange_open", "exchange_close", "session_open", "session_close"):
        if key in section and isinstance(section[key], str):
            section[key] = hms_to_seconds(section[key])
    return CleanConfig(**section)


def preavg_config(cfg: dict) -> PreAvgConfig:
    return PreAvgConfig(**cfg.get("preavg", {}))


def sim_config(cfg: dict, seed: int | None) -> SimConfig:
    section = dict(cfg.get("sim", {}))
    if "sigma" in section and isinstance(section["sigma"], list):
        section["sigma"] = tuple(section["sigma"])
    if seed is not None:
        section["seed"] = seed
    return SimConfig(**section)


def oos_split(cfg: dict) -> OosSplit:
    return OosSplit(**cfg.get("oos", {}))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)  # numpy scalars repr as np.float64(...)
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info("wrote %s", path)


def cmd_simulate(args, cfg: dict) -> int:
    config = sim_config(cfg, args.seed)
    days = simulate_panel(config, out_dir=args.out_dir)
    logger.info("simulated %d days for %s into %s", len(days), config.symbol, args.out_dir)
    return 0


def cmd_compute(args, cfg: dict) -> int:
    paths = sorted(glob.glob(os.path.join(args.input_dir, "*_????-??-??.csv")))
    if not paths:
        raise SystemExit(f"no tick files found in {args.input_dir}")
    by_symbol: dict[str, list] = defaultdict(list)
    for path in paths:
        try:
            series = read_tick_file(path)
        except (OSError, ValueError) as exc:
            logger.warning("skipping %s: %s", path, exc)
            continue
        by_symbol[series.symbol].append(series)
    if not by_symbol:
        raise SystemExit("all tick files were unreadable")
    ccfg = clean_config(cfg)
    pcfg = preavg_config(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    for symbol in sorted(by_symbol):
        days = sorted(by_symbol[symbol], key=lambda s: s.date)
        records = compute_panel(
            days,
            estimator=args.estimator,
            preavg_cfg=pcfg,
            clean_cfg=ccfg,
            naive_delta=cfg.get("naive_delta", NAIVE_DELTA),
            preavg_delta=cfg.get("preavg_delta", PREAVG_DELTA),
        )
        out = os.path.join(args.out_dir, f"records_{symbol}.csv")
        write_records_csv(records, out)
        logger.info("wrote %s (%d days)", out, len(records))
    return 0


def _model_rows(frame, model_id: str, horizon: int | None, args) -> list[list]:
    entry = catalog_entry(
        model_id,
        horizon=horizon,
        kurtosis_form=args.kurtosis_form,
        response_form=args.response_form,
    )
    result = fit_model(frame, entry)
    rows = []
    for name in entry.regressors:
        cell = result[name]
        rows.append(
            [
                entry.model_id,
                entry.horizon,
                name,
                cell["estimate"],
                cell["std_error"],
                cell["p_value"],
                significance_code(cell["p_value"]),
                None,
                None,
                None,
                None,
            ]
        )
    rows.append(
        [
            entry.model_id,
            entry.horizon,
            "",
            None,
            None,
            None,
            "",
            result.r_squared,
            result.f_p_value,
            result.aic,
            result.n_obs,
        ]
    )
    return rows


def cmd_regress(args, cfg: dict) -> int:
    frame = read_records_csv(args.records)
    model_ids = _resolve_models(args.models, cfg)
    horizons = args.horizons or cfg.get("horizons") or [None]
    rows: list[list] = []
    failures = 0
    for model_id in model_ids:
        for horizon in horizons:
            try:
                rows.extend(_model_rows(frame, model_id, horizon, args))
            except (ValueError, KeyError) as exc:
                failures += 1
                logger.warning("model %s (d=%s) failed: %s", model_id, horizon, exc)
    if not rows:
        raise SystemExit("every requested model failed")
    if failures:
        logger.warning("%d model fits failed; see warnings above", failures)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "results.csv"), RESULTS_HEADER, rows)
    return 0


def _resolve_models(option, cfg: dict) -> list[str]:
    if option:
        requested = option
    elif cfg.get("models"):
        requested = cfg["models"]
    else:
        requested = [m for m in MODEL_CATALOG if not m.endswith("L5")]
    unknown = [m for m in requested if m not in MODEL_CATALOG]
    if unknown:
        raise SystemExit(f"unknown model ids: {unknown}")
    return list(requested)


def cmd_oos(args, cfg: dict) -> int:
    frame = read_records_csv(args.records)
    split = oos_split(cfg)
    if args.train is not None or args.test is not None or args.scheme is not None:
        split = OosSplit(
            train_len=args.train if args.train is not None else split.train_len,
            test_len=args.test if args.test is not None else split.test_len,
            scheme=args.scheme or split.scheme,
        )
    rows = []
    for pair in args.pair:
        restricted_id, augmented_id = (p.strip() for p in pair.split(","))
        restricted = catalog_entry(
            restricted_id, kurtosis_form=args.kurtosis_form,
            response_form=args.response_form,
        )
        augmented = catalog_entry(
            augmented_id, kurtosis_form=args.kurtosis_form,
            response_form=args.response_form,
        )
        result = oos_evaluate(frame, restricted, augmented, split)
        rows.append(result.as_row())
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "oos.csv"), OOS_HEADER, rows)
    return 0


def cmd_select(args, cfg: dict) -> int:
    frame = read_records_csv(args.records)
    spec, token = select_covariates(
        frame, response=args.response, kurtosis_form=args.kurtosis_form
    )
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(
        os.path.join(args.out_dir, "selection.csv"),
        ["response", "kurtosis_form", "token"],
        [[args.response, args.kurtosis_form, token]],
    )
    print(token)
    return 0


def cmd_report(args, cfg: dict) -> int:
    paths = sorted(glob.glob(os.path.join(args.records_dir, "records_*.csv")))
    if not paths:
        raise SystemExit(f"no records_*.csv files in {args.records_dir}")
    per_symbol = {}
    for path in paths:
        symbol = os.path.basename(path)[len("records_"):-len(".csv")]
        frame = read_records_csv(path)
        per_symbol[symbol] = report_symbol(
            frame, kurtosis_form=args.kurtosis_form, response_form=args.response_form
        )
    summary, counts = aggregate_report(per_symbol)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(
        os.path.join(args.out_dir, "summary.csv"),
        list(summary.columns),
        summary.values.tolist(),
    )
    _write_csv(
        os.path.join(args.out_dir, "counts.csv"),
        list(counts.columns),
        counts.values.tolist(),
    )
    return 0


def _add_form_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--kurtosis-form", choices=("rkurt", "sqrt_rkurt"), default="rkurt",
        help="use realized kurtosis or its square root as the regressor",
    )
    sub.add_argument(
        "--response-form", choices=("rvar", "bipower"), default="rvar",
        help="forecast realized variance or bipower variation",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfmoments",
        description="Realized-moment pipeline: tick data to variance forecasts.",
    )
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="simulation seed override")
    parser.add_argument("--out-dir", default=".", help="output directory")
    parser.add_argument("--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="write synthetic tick files plus ground truth")

    p_compute = sub.add_parser("compute", help="tick files to daily-record CSVs")
    p_compute.add_argument("--input-dir", required=True)
    p_compute.add_argument("--estimator", choices=("naive", "preavg"), default="naive")

    p_regress = sub.add_parser("regress", help="fit catalog models on a records CSV")
    p_regress.add_argument("--records", required=True)
    p_regress.add_argument("--models", nargs="+", metavar="ID")
    p_regress.add_argument("--horizons", nargs="+", type=int, metavar="D")
    _add_form_flags(p_regress)

    p_oos = sub.add_parser("oos", help="out-of-sample comparison of nested pairs")
    p_oos.add_argument("--records", required=True)
    p_oos.add_argument(
        "--pair", action="append", required=True, metavar="RESTRICTED,AUGMENTED",
        help="model-id pair, e.g. 28,31 (repeatable)",
    )
    p_oos.add_argument("--train", type=int)
    p_oos.add_argument("--test", type=int)
    p_oos.add_argument("--scheme", choices=("fixed", "recursive"))
    _add_form_flags(p_oos)

    p_select = sub.add_parser("select", help="stepwise-AIC covariate selection")
    p_select.add_argument("--records", required=True)
    p_select.add_argument("--response", choices=("rvar", "bipower"), default="rvar")
    p_select.add_argument(
        "--kurtosis-form", choices=("rkurt", "sqrt_rkurt"), default="rkurt"
    )

    p_report = sub.add_parser("report", help="cross-symbol significance summary")
    p_report.add_argument("--records-dir", required=True)
    _add_form_flags(p_report)

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "compute": cmd_compute,
    "regress": cmd_regress,
    "oos": cmd_oos,
    "select": cmd_select,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    cfg = load_config(args.config)
    return _COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    sys.exit(main())
