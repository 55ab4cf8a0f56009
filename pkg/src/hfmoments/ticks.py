"""Tick-file parsing, cleaning, and grid resampling.

The cleaning procedure runs five steps over a day of trades: restrict to
exchange hours, trim the first and last half hour of the session, drop
non-positive prices, collapse duplicate timestamps to their median price,
and remove outliers relative to a local price neighborhood. The cleaned
series is then sampled onto an equidistant grid by previous-tick
(last-observation-carried-forward) interpolation.
"""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .validation import check_positive

logger = logging.getLogger(__name__)


def hms_to_seconds(text: str) -> float:
    """Parse ``HH:MM:SS`` or ``HH:MM:SS.ffffff`` into seconds since midnight."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"bad time field {text!r}")
    hours, minutes, seconds = int(parts[0]), int(parts[1]), float(parts[2])
    return hours * 3600 + minutes * 60 + seconds


def seconds_to_hms(t: float) -> str:
    """Inverse of :func:`hms_to_seconds`, microsecond resolution."""
    total_us = round(t * 1e6)
    sec_us, us = divmod(total_us, 1_000_000)
    h, rem = divmod(int(sec_us), 3600)
    m, s = divmod(rem, 60)
    base = f"{h:02d}:{m:02d}:{s:02d}"
    return f"{base}.{us:06d}" if us else base


@dataclass(frozen=True)
class TickRecord:
    """One trade: time in seconds since midnight, price, share count."""

    time: float
    price: float
    size: int


@dataclass
class TickSeries:
    """Ordered trades for one symbol-day."""

    date: str
    symbol: str
    records: list[TickRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.records], dtype=float)

    def prices(self) -> np.ndarray:
        return np.array([r.price for r in self.records], dtype=float)

    def sizes(self) -> np.ndarray:
        return np.array([r.size for r in self.records], dtype=float)


@dataclass(frozen=True)
class CleanConfig:
    """Session clock and outlier-filter settings for tick cleaning.

    ``outlier_window`` is the number of neighboring observations used for
    the local mean/standard deviation, ``outlier_multiplier`` the rejection
    threshold in standard deviations.
    """

    exchange_open: float = hms_to_seconds("09:30:00")
    exchange_close: float = hms_to_seconds("16:00:00")
    session_open: float = hms_to_seconds("10:00:00")
    session_close: float = hms_to_seconds("15:30:00")
    outlier_window: int = 5
    outlier_multiplier: float = 3.0

    def __post_init__(self) -> None:
        if not (
            self.exchange_open
            <= self.session_open
            < self.session_close
            <= self.exchange_close
        ):
            raise ValueError("session window must nest inside exchange hours")
        if self.outlier_window < 2:
            raise ValueError("outlier_window must be >= 2")
        check_positive(self.outlier_multiplier, "outlier_multiplier")

    @property
    def session_seconds(self) -> float:
        return self.session_close - self.session_open


@dataclass
class GridPath:
    """Equidistant log-price samples spanning one trading session."""

    date: str
    delta: float
    log_prices: np.ndarray

    def __post_init__(self) -> None:
        self.log_prices = np.asarray(self.log_prices, dtype=float)
        if self.log_prices.ndim != 1 or len(self.log_prices) < 1:
            raise ValueError("log_prices must be a non-empty 1-D array")
        check_positive(self.delta, "delta")

    @property
    def n(self) -> int:
        """Number of grid increments (one less than the point count)."""
        return len(self.log_prices) - 1

    def increments(self) -> np.ndarray:
        return np.diff(self.log_prices)


def parse_ticks(stream, symbol: str, date: str) -> TickSeries:
    """Read ``time,price,size`` CSV lines into a time-sorted :class:`TickSeries`.

    An optional header line is skipped. Malformed lines are logged with
    their line number and dropped; empty input yields an empty series.
    The sort is stable so same-timestamp trades keep file order.
    """
    records: list[TickRecord] = []
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if lineno == 1 and _looks_like_header(fields):
            continue
        if len(fields) != 3:
            logger.warning("%s %s line %d: expected 3 fields, got %d",
                           symbol, date, lineno, len(fields))
            continue
        try:
            t = hms_to_seconds(fields[0])
            price = float(fields[1])
            size = int(float(fields[2]))
            if size < 0:
                raise ValueError(f"negative size {size}")
        except ValueError as exc:
            logger.warning("%s %s line %d: %s", symbol, date, lineno, exc)
            continue
        records.append(TickRecord(time=t, price=price, size=size))
    records.sort(key=lambda r: r.time)
    return TickSeries(date=date, symbol=symbol, records=records)


def _looks_like_header(fields: list[str]) -> bool:
    try:
        float(fields[-1])
    except (ValueError, IndexError):
        return True
    return False


def clean_ticks(raw: TickSeries, cfg: CleanConfig | None = None) -> TickSeries:
    """Apply the five cleaning steps; never fails, only filters records."""
    cfg = cfg or CleanConfig()
    kept = [
        r
        for r in raw.records
        if cfg.exchange_open <= r.time <= cfg.exchange_close
        and cfg.session_open <= r.time <= cfg.session_close
        and r.price > 0
    ]
    collapsed = _collapse_duplicate_times(kept)
    filtered = _drop_outliers(collapsed, cfg.outlier_window, cfg.outlier_multiplier)
    return TickSeries(date=raw.date, symbol=raw.symbol, records=filtered)


def _collapse_duplicate_times(records: list[TickRecord]) -> list[TickRecord]:
    """Replace same-timestamp runs with one record at the median price."""
    out: list[TickRecord] = []
    i = 0
    n = len(records)
    while i < n:
        j = i + 1
        while j < n and records[j].time == records[i].time:
            j += 1
        if j == i + 1:
            out.append(records[i])
        else:
            group = records[i:j]
            out.append(
                TickRecord(
                    time=records[i].time,
                    price=float(statistics.median(r.price for r in group)),
                    size=sum(r.size for r in group),
                )
            )
        i = j
    return out


def _drop_outliers(records: list[TickRecord], m: int, k: float) -> list[TickRecord]:
    """Single pass removing prices more than ``k`` local standard deviations
    from the mean of their neighborhood.

    The neighborhood of observation ``i`` is the ``min(m, N-1)`` nearest
    observations by index, excluding ``i`` itself; distance ties prefer the
    earlier observation, and the window shifts inward at the series edges.
    A record whose neighbors are all identical survives only if it matches
    them exactly. Neighbor statistics always come from the original series,
    so removals do not cascade.
    """
    n = len(records)
    if n <= 2:
        # fewer than two neighbors: no sample dispersion to test against
        return list(records)
    m_eff = min(m, n - 1)
    p = np.array([r.price for r in records], dtype=float)
    width = m_eff + 1
    starts = np.clip(np.arange(n) - (m_eff + 1) // 2, 0, n - width)
    windows = sliding_window_view(p, width)[starts]  # (n, m_eff + 1), row i holds p[i]
    nbr_sum = windows.sum(axis=1) - p
    nbr_mean = nbr_sum / m_eff

    cols = starts[:, None] + np.arange(width)[None, :]
    nbr_mask = cols != np.arange(n)[:, None]
    masked = np.where(nbr_mask, windows, np.nan)
    nbr_min = np.nanmin(masked, axis=1)
    nbr_max = np.nanmax(masked, axis=1)

    keep = np.ones(n, dtype=bool)
    degenerate = nbr_min == nbr_max
    keep[degenerate] = p[degenerate] == nbr_min[degenerate]

    regular = ~degenerate
    if np.any(regular):
        dev = np.where(nbr_mask, windows - nbr_mean[:, None], 0.0)
        ss = (dev**2).sum(axis=1)
        s = np.sqrt(ss / (m_eff - 1))
        keep[regular] = np.abs(p[regular] - nbr_mean[regular]) <= k * s[regular]

    return [r for r, ok in zip(records, keep) if ok]


def resample(clean: TickSeries, delta: float, cfg: CleanConfig | None = None) -> GridPath:
    """Previous-tick sample the cleaned day onto an equidistant log-price grid.

    Grid points run from session open to session close inclusive; each takes
    the log price of the last trade at or before it, and points before the
    first trade take the first trade's price.
    """
    cfg = cfg or CleanConfig()
    check_positive(delta, "delta")
    if len(clean.records) == 0:
        raise ValueError(f"empty day: {clean.symbol} {clean.date}")
    span = cfg.session_seconds
    n = span / delta
    if abs(n - round(n)) > 1e-9:
        raise ValueError(f"delta={delta} does not divide the session length {span}")
    n = int(round(n))
    grid_times = cfg.session_open + delta * np.arange(n + 1)
    times = clean.times()
    prices = clean.prices()
    # index of last trade with time <= t; -1 means no trade yet -> first trade
    idx = np.searchsorted(times, grid_times, side="right") - 1
    idx = np.clip(idx, 0, None)
    return GridPath(date=clean.date, delta=delta, log_prices=np.log(prices[idx]))


def closing_price(clean: TickSeries, cfg: CleanConfig | None = None) -> float:
    """Price of the last cleaned trade at or before the session close."""
    cfg = cfg or CleanConfig()
    eligible = [r for r in clean.records if r.time <= cfg.session_close]
    if not eligible:
        raise ValueError(f"no closing trade: {clean.symbol} {clean.date}")
    return eligible[-1].price


def daily_return(today_close: float, prev_close: float) -> float:
    """Log-difference of consecutive closing prices."""
    check_positive(today_close, "today_close")
    check_positive(prev_close, "prev_close")
    return math.log(today_close) - math.log(prev_close)


def daily_volume(clean: TickSeries) -> float:
    """Total traded shares over the session window; 0 for an empty day."""
    return float(sum(r.size for r in clean.records))
