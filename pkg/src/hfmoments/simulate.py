"""Synthetic tick-data generator with exact ground truth.

Each day follows a drift + Brownian + compound-Poisson log-price model on a
discrete intraday grid, optionally observed through additive i.i.d. noise.
Jump times are snapped to grid increments so the day's quadratic variation
decomposes exactly into the integrated variance and the summed squared
jumps. Every day draws from an independent PRNG stream keyed by
``(seed, day_index)``, so serial and parallel generation agree bit for bit.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import timedelta

import numpy as np

from .ticks import CleanConfig, GridPath, TickRecord, TickSeries, seconds_to_hms
from .validation import check_non_negative

GROUND_TRUTH_HEADER = ["date", "true_iv", "true_qv", "n_jumps", "sum_jump3", "sum_jump4"]


@dataclass(frozen=True)
class SimConfig:
    """Data-generating-process settings for the simulator.

    ``sigma`` is the spot volatility per square-root day; a pair
    ``(low, high)`` activates a two-state day-level regime with the given
    persistence, providing volatility clustering. ``jump_count`` forces an
    exact per-day jump count instead of a Poisson draw. Prices written to
    tick files are rounded to ``price_decimals`` (``None`` disables).
    """

    n_per_day: int = 330
    days: int = 250
    mu: float = 0.0
    sigma: float | tuple[float, float] = 0.01
    regime_persistence: float = 0.95
    jump_intensity: float = 0.0
    jump_dist: str = "normal"
    jump_scale: float = 0.0
    jump_count: int | None = None
    noise_eta: float = 0.0
    seed: int = 0
    symbol: str = "SIM"
    start_date: str = "2020-01-02"
    start_log_price: float = math.log(100.0)
    price_decimals: int | None = 4
    volume_coupling: bool = False

    def __post_init__(self) -> None:
        if self.n_per_day < 2:
            raise ValueError("n_per_day must be >= 2")
        if self.days < 1:
            raise ValueError("days must be >= 1")
        check_non_negative(self.jump_intensity, "jump_intensity")
        check_non_negative(self.noise_eta, "noise_eta")
        if self.jump_dist not in ("normal", "fixed"):
            raise ValueError("jump_dist must be 'normal' or 'fixed'")
        for s in self.sigmas():
            check_non_negative(s, "sigma")

    def sigmas(self) -> tuple[float, ...]:
        if isinstance(self.sigma, tuple):
            return tuple(float(s) for s in self.sigma)
        return (float(self.sigma),)


@dataclass
class SimDay:
    """One simulated day: latent and observed grids plus exact ground truth."""

    date: str
    latent: GridPath
    observed: GridPath
    true_iv: float
    jumps: list[tuple[float, float]] = field(default_factory=list)

    @property
    def true_qv(self) -> float:
        return self.true_iv + sum(size**2 for _, size in self.jumps)

    def jump_power_sum(self, p: int) -> float:
        return sum(size**p for _, size in self.jumps)


def _day_rng(cfg: SimConfig, day_index: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, day_index])


def _day_sigma(cfg: SimConfig, day_index: int) -> float:
    sigmas = cfg.sigmas()
    if len(sigmas) == 1:
        return sigmas[0]
    # day-level two-state Markov chain from its own stream, so per-day
    # draws stay independent of the regime path
    rng = np.random.default_rng([cfg.seed, len(sigmas), 0x5E71])
    state = 0
    for _ in range(day_index):
        if rng.random() > cfg.regime_persistence:
            state = 1 - state
    return sigmas[state]


def simulate_day(
    cfg: SimConfig, day_index: int, x0: float | None = None, date: str | None = None
) -> SimDay:
    """Euler-discretized day path with jumps and observation noise.

    Jump counts are Poisson (or ``cfg.jump_count`` exactly), times uniform
    over the day, each snapped onto one grid increment. ``true_iv`` is the
    day's integrated variance for the (constant within day) spot volatility.
    """
    rng = _day_rng(cfg, day_index)
    n = cfg.n_per_day
    dt = 1.0 / n
    sigma = _day_sigma(cfg, day_index)
    increments = cfg.mu * dt + sigma * math.sqrt(dt) * rng.standard_normal(n)

    if cfg.jump_count is not None:
        n_jumps = cfg.jump_count
    else:
        n_jumps = int(rng.poisson(cfg.jump_intensity)) if cfg.jump_intensity > 0 else 0
    jumps: list[tuple[float, float]] = []
    if n_jumps > 0:
        times = np.sort(rng.uniform(0.0, 1.0, size=n_jumps))
        if cfg.jump_dist == "normal":
            sizes = rng.normal(0.0, cfg.jump_scale, size=n_jumps)
        else:
            sizes = cfg.jump_scale * rng.choice([-1.0, 1.0], size=n_jumps)
        for t, size in zip(times, sizes):
            idx = min(int(t * n), n - 1)
            increments[idx] += size
            jumps.append((float(t), float(size)))

    start = cfg.start_log_price if x0 is None else x0
    latent = np.empty(n + 1)
    latent[0] = start
    np.cumsum(increments, out=latent[1:])
    latent[1:] += start

    if cfg.noise_eta > 0:
        observed = latent + rng.normal(0.0, cfg.noise_eta, size=n + 1)
    else:
        observed = latent.copy()

    session = CleanConfig()
    delta = session.session_seconds / n
    day_date = date or _nth_weekday(cfg.start_date, day_index)
    return SimDay(
        date=day_date,
        latent=GridPath(date=day_date, delta=delta, log_prices=latent),
        observed=GridPath(date=day_date, delta=delta, log_prices=observed),
        true_iv=sigma**2,
        jumps=jumps,
    )


def theoretical_limits(day: SimDay) -> tuple[float, float]:
    """Large-sample targets of the normalized moments for this day's path:
    jump cube/fourth-power sums over powers of the quadratic variation."""
    qv = day.true_qv
    if qv <= 0:
        raise ValueError("quadratic variation is zero")
    return day.jump_power_sum(3) / qv**1.5, day.jump_power_sum(4) / qv**2


def _nth_weekday(start: str, n: int) -> str:
    d = date_type.fromisoformat(start)
    while d.weekday() >= 5:
        d += timedelta(days=1)
    step = 0
    while step < n:
        d += timedelta(days=1)
        if d.weekday() < 5:
            step += 1
    return d.isoformat()


def day_to_ticks(cfg: SimConfig, day: SimDay) -> TickSeries:
    """Render one simulated day as a trade series on the session grid."""
    session = CleanConfig()
    n = day.observed.n
    times = session.session_open + session.session_seconds / n * np.arange(n + 1)
    prices = np.exp(day.observed.log_prices)
    if cfg.price_decimals is not None:
        prices = np.round(prices, cfg.price_decimals)
    size = 1 + (1 if (cfg.volume_coupling and day.jumps) else 0)
    records = [
        TickRecord(time=float(t), price=float(p), size=size)
        for t, p in zip(times, prices)
    ]
    return TickSeries(date=day.date, symbol=cfg.symbol, records=records)


def simulate_panel(cfg: SimConfig, out_dir: str | None = None) -> list[SimDay]:
    """Simulate ``cfg.days`` chained days; optionally emit tick CSVs plus a
    ground-truth sidecar (``ground_truth.csv``) into ``out_dir``."""
    days: list[SimDay] = []
    x0 = cfg.start_log_price
    for d in range(cfg.days):
        day = simulate_day(cfg, d, x0=x0)
        x0 = float(day.latent.log_prices[-1])
        days.append(day)
    if out_dir is not None:
        write_tick_files([day_to_ticks(cfg, day) for day in days], out_dir)
        write_ground_truth(days, out_dir)
    return days


def write_tick_files(series_list: list[TickSeries], out_dir: str) -> list[str]:
    """Write one ``<SYMBOL>_<date>.csv`` trade file per series."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for series in series_list:
        path = os.path.join(out_dir, f"{series.symbol}_{series.date}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "price", "size"])
            for rec in series.records:
                writer.writerow([seconds_to_hms(rec.time), repr(rec.price), rec.size])
        paths.append(path)
    return paths


def write_ground_truth(days: list[SimDay], out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    truth_path = os.path.join(out_dir, "ground_truth.csv")
    with open(truth_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUND_TRUTH_HEADER)
        for day in days:
            writer.writerow(
                [
                    day.date,
                    repr(day.true_iv),
                    repr(day.true_qv),
                    len(day.jumps),
                    repr(day.jump_power_sum(3)),
                    repr(day.jump_power_sum(4)),
                ]
            )
    return truth_path


@dataclass(frozen=True)
class PlantedConfig:
    """Panel generator whose next-day variance loads on today's jump sizes.

    Tomorrow's integrated variance is ``base_var + signal_coef * sum(J^4)
    + eps`` over today's jumps, so a fourth-power realized moment computed
    today genuinely predicts tomorrow's realized variance. With
    ``signal_coef = 0`` the panel has no cross-day dependence at all.
    """

    days: int = 250
    n_per_day: int = 330
    base_var: float = 1e-4
    signal_coef: float = 9000.0
    jump_prob: float = 0.5
    jump_size: float = 0.01
    eps_sd: float = 1e-5
    noise_eta: float = 0.0
    mean_tick_size: float = 100.0
    seed: int = 0
    symbol: str = "PLANT"
    start_date: str = "2020-01-02"

    def __post_init__(self) -> None:
        check_non_negative(self.signal_coef, "signal_coef")
        check_non_negative(self.eps_sd, "eps_sd")


def simulate_planted_panel(
    cfg: PlantedConfig, out_dir: str | None = None
) -> tuple[list[TickSeries], list[SimDay]]:
    """Generate a panel of tick days with the planted variance relation.

    Returns the tick series (random per-tick sizes give a non-degenerate
    volume column) together with the underlying :class:`SimDay` ground
    truth. Writes the same file layout as :func:`simulate_panel` when
    ``out_dir`` is given.
    """
    ticks: list[TickSeries] = []
    days: list[SimDay] = []
    x0 = math.log(100.0)
    var_next = cfg.base_var
    for d in range(cfg.days):
        rng = np.random.default_rng([cfg.seed, 0xBEEF, d])
        sigma = math.sqrt(var_next)
        day_cfg = SimConfig(
            n_per_day=cfg.n_per_day,
            days=1,
            sigma=sigma,
            jump_count=int(rng.random() < cfg.jump_prob),
            jump_dist="fixed",
            jump_scale=cfg.jump_size,
            noise_eta=cfg.noise_eta,
            seed=cfg.seed,
            symbol=cfg.symbol,
        )
        day = simulate_day(day_cfg, d, x0=x0, date=_nth_weekday(cfg.start_date, d))
        x0 = float(day.latent.log_prices[-1])
        days.append(day)

        series = day_to_ticks(day_cfg, day)
        sizes = rng.poisson(cfg.mean_tick_size, size=len(series.records)) + 1
        series = TickSeries(
            date=series.date,
            symbol=cfg.symbol,
            records=[
                TickRecord(time=r.time, price=r.price, size=int(s))
                for r, s in zip(series.records, sizes)
            ],
        )
        ticks.append(series)

        eps = rng.normal(0.0, cfg.eps_sd)
        var_next = max(
            cfg.base_var / 4.0,
            cfg.base_var + cfg.signal_coef * day.jump_power_sum(4) + eps,
        )
    if out_dir is not None:
        write_tick_files(ticks, out_dir)
        write_ground_truth(days, out_dir)
    return ticks, days
