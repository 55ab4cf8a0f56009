import math
import os

import numpy as np
import pytest

from hfmoments.moments import PreAvgConfig, preavg_moments
from hfmoments.panel import read_tick_file
from hfmoments.simulate import (
    GROUND_TRUTH_HEADER,
    PlantedConfig,
    SimConfig,
    SimDay,
    day_to_ticks,
    simulate_day,
    simulate_panel,
    simulate_planted_panel,
    theoretical_limits,
)


class TestSimulateDay:
    def test_noiseless_constant_vol_identity(self):
        cfg = SimConfig(n_per_day=500, sigma=0.02, seed=5)
        day = simulate_day(cfg, 0)
        assert day.true_iv == pytest.approx(0.02**2)
        assert day.true_qv == day.true_iv
        np.testing.assert_array_equal(day.observed.log_prices, day.latent.log_prices)

    def test_no_jumps_when_intensity_zero(self):
        day = simulate_day(SimConfig(n_per_day=100, seed=2), 0)
        assert day.jumps == []
        assert day.true_qv == day.true_iv

    def test_poisson_jump_counts(self):
        cfg = SimConfig(n_per_day=50, jump_intensity=5.0, jump_scale=0.01, seed=9)
        counts = [len(simulate_day(cfg, d).jumps) for d in range(2000)]
        assert 4.8 <= np.mean(counts) <= 5.2

    def test_forced_jump_count(self):
        cfg = SimConfig(
            n_per_day=100, jump_count=1, jump_dist="fixed", jump_scale=0.02, seed=3
        )
        for d in range(20):
            day = simulate_day(cfg, d)
            assert len(day.jumps) == 1
            assert abs(day.jumps[0][1]) == pytest.approx(0.02)

    def test_jump_snapped_onto_one_increment(self):
        cfg = SimConfig(
            n_per_day=100, sigma=0.0, jump_count=1, jump_dist="fixed",
            jump_scale=0.02, seed=7,
        )
        day = simulate_day(cfg, 0)
        inc = day.latent.increments()
        assert np.count_nonzero(np.abs(inc) > 1e-12) == 1
        assert inc.sum() == pytest.approx(day.jumps[0][1])

    def test_deterministic_per_day_stream(self):
        cfg = SimConfig(n_per_day=200, noise_eta=1e-4, jump_intensity=1.0,
                        jump_scale=0.01, seed=11)
        a = simulate_day(cfg, 3)
        b = simulate_day(cfg, 3)
        np.testing.assert_array_equal(a.observed.log_prices, b.observed.log_prices)
        c = simulate_day(cfg, 4)
        assert not np.array_equal(a.latent.log_prices, c.latent.log_prices)

    def test_noise_independent_of_latent(self):
        cfg = SimConfig(n_per_day=400, sigma=0.01, noise_eta=1e-3, seed=13)
        eps_all, inc_all = [], []
        for d in range(50):
            day = simulate_day(cfg, d)
            eps = day.observed.log_prices - day.latent.log_prices
            eps_all.append(eps[1:])
            inc_all.append(day.latent.increments())
        corr = np.corrcoef(np.concatenate(eps_all), np.concatenate(inc_all))[0, 1]
        assert abs(corr) < 0.05

    def test_two_state_regime_clusters(self):
        cfg = SimConfig(
            n_per_day=10, days=300, sigma=(0.005, 0.02), regime_persistence=0.97,
            seed=17,
        )
        ivs = np.array([simulate_day(cfg, d).true_iv for d in range(300)])
        assert {round(v, 10) for v in ivs} == {0.005**2, 0.02**2}
        d = ivs - ivs.mean()
        acf1 = float(d[1:] @ d[:-1]) / float(d @ d)
        assert acf1 > 0.3


class TestTheoreticalLimits:
    def test_no_jumps(self):
        day = simulate_day(SimConfig(n_per_day=100, sigma=0.01, seed=1), 0)
        assert theoretical_limits(day) == (0.0, 0.0)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_single_jump_zero_iv(self, sign):
        cfg = SimConfig(
            n_per_day=100, sigma=0.0, jump_count=1, jump_dist="fixed",
            jump_scale=0.02, seed=5,
        )
        day = simulate_day(cfg, 0)
        day.jumps = [(day.jumps[0][0], sign * abs(day.jumps[0][1]))]
        nrskew_lim, nrkurt_lim = theoretical_limits(day)
        assert nrskew_lim == pytest.approx(sign)
        assert nrkurt_lim == pytest.approx(1.0)

    def test_direct_formula_value(self):
        day = simulate_day(SimConfig(n_per_day=100, sigma=0.01, seed=2), 0)
        day.jumps = [(0.5, 0.02)]
        _, nrkurt_lim = theoretical_limits(day)
        assert nrkurt_lim == pytest.approx(0.02**4 / (1e-4 + 4e-4) ** 2)
        assert nrkurt_lim == pytest.approx(0.64)

    def test_zero_qv_errors(self):
        day = simulate_day(SimConfig(n_per_day=100, sigma=0.0, seed=2), 0)
        with pytest.raises(ValueError):
            theoretical_limits(day)


class TestPanelEmission:
    def test_files_conform_to_tick_schema(self, tmp_path):
        cfg = SimConfig(n_per_day=30, days=3, sigma=0.01, seed=21, symbol="ABC")
        simulate_panel(cfg, out_dir=str(tmp_path))
        files = sorted(p for p in os.listdir(tmp_path) if p.startswith("ABC_"))
        assert len(files) == 3
        series = read_tick_file(str(tmp_path / files[0]))
        assert len(series) == 31
        assert series.symbol == "ABC"
        with open(tmp_path / "ground_truth.csv") as fh:
            assert fh.readline().strip() == ",".join(GROUND_TRUTH_HEADER)

    def test_same_seed_byte_identical(self, tmp_path):
        cfg = SimConfig(n_per_day=25, days=2, sigma=0.01, noise_eta=1e-4, seed=4)
        a, b = tmp_path / "a", tmp_path / "b"
        simulate_panel(cfg, out_dir=str(a))
        simulate_panel(cfg, out_dir=str(b))
        for name in os.listdir(a):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_roundtrip_recovers_prices(self, tmp_path):
        cfg = SimConfig(n_per_day=40, days=1, sigma=0.01, seed=6, price_decimals=None)
        days = simulate_panel(cfg, out_dir=str(tmp_path))
        series = read_tick_file(str(tmp_path / f"SIM_{days[0].date}.csv"))
        emitted = np.exp(days[0].observed.log_prices)
        parsed = series.prices()
        np.testing.assert_allclose(parsed, emitted, atol=1e-9)

    def test_price_rounding_mimics_tick_size(self):
        cfg = SimConfig(n_per_day=40, days=1, sigma=0.01, seed=6)
        day = simulate_day(cfg, 0)
        ticks = day_to_ticks(cfg, day)
        for rec in ticks.records:
            assert rec.price == round(rec.price, 4)

    def test_volume_coupling(self):
        cfg = SimConfig(
            n_per_day=20, days=1, sigma=0.01, jump_count=1, jump_dist="fixed",
            jump_scale=0.01, seed=8, volume_coupling=True,
        )
        jump_day = simulate_day(cfg, 0)
        assert sum(r.size for r in day_to_ticks(cfg, jump_day).records) == 2 * 21
        quiet = SimConfig(n_per_day=20, days=1, sigma=0.01, seed=8, volume_coupling=True)
        quiet_day = simulate_day(quiet, 0)
        assert sum(r.size for r in day_to_ticks(quiet, quiet_day).records) == 21

    def test_chained_days_share_price_level(self):
        cfg = SimConfig(n_per_day=50, days=3, sigma=0.01, seed=30)
        days = simulate_panel(cfg)
        for prev, cur in zip(days, days[1:]):
            assert cur.latent.log_prices[0] == pytest.approx(prev.latent.log_prices[-1])

    def test_weekday_dates(self):
        cfg = SimConfig(n_per_day=10, days=10, sigma=0.01, seed=1)
        days = simulate_panel(cfg)
        import datetime

        for day in days:
            assert datetime.date.fromisoformat(day.date).weekday() < 5
        assert len({day.date for day in days}) == 10


class TestPreavgLimitConvergence:
    def test_deviation_shrinks_with_grid_size(self):
        sizes = (390, 2340, 23400)
        mads = []
        for n in sizes:
            k = int(round(math.sqrt(n)))
            cfg = SimConfig(
                n_per_day=n, sigma=0.01, jump_count=1, jump_dist="fixed",
                jump_scale=0.02, noise_eta=1e-4, seed=100,
            )
            devs = []
            for d in range(60):
                day = simulate_day(cfg, d)
                lim_skew, lim_kurt = theoretical_limits(day)
                m = preavg_moments(day.observed, PreAvgConfig(k_n=k))
                if m.nrkurt is None:
                    continue
                devs.append(abs(m.nrskew - lim_skew) + abs(m.nrkurt - lim_kurt))
            mads.append(float(np.median(devs)))
        assert mads[0] > mads[1] > mads[2]


class TestPlantedPanel:
    def test_variance_loads_on_lagged_jump_power(self):
        cfg = PlantedConfig(days=120, seed=3)
        _, days = simulate_planted_panel(cfg)
        j4 = np.array([d.jump_power_sum(4) for d in days[:-1]])
        iv_next = np.array([d.true_iv for d in days[1:]])
        fitted = cfg.base_var + cfg.signal_coef * j4
        assert np.corrcoef(j4, iv_next)[0, 1] > 0.9
        assert np.all(np.abs(iv_next - fitted) < 6 * cfg.eps_sd)

    def test_null_config_breaks_dependence(self):
        cfg = PlantedConfig(days=200, seed=4, signal_coef=0.0, eps_sd=0.0)
        _, days = simulate_planted_panel(cfg)
        ivs = {round(d.true_iv, 12) for d in days}
        assert ivs == {round(cfg.base_var, 12)}

    def test_tick_volumes_vary(self):
        ticks, _ = simulate_planted_panel(PlantedConfig(days=3, seed=5))
        vols = [sum(r.size for r in day.records) for day in ticks]
        assert len(set(vols)) > 1

    def test_deterministic(self):
        a, _ = simulate_planted_panel(PlantedConfig(days=2, seed=6))
        b, _ = simulate_planted_panel(PlantedConfig(days=2, seed=6))
        assert a[0].records == b[0].records
