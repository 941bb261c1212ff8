import math

import numpy as np
import pandas as pd
import pytest

from conftest import discrete_power_law, make_series
from errors import InsufficientDataError, OutOfRangeError, ParameterError
from inference import (ConditionalHistogram, OutOfRange, build_conditional_histogram,
                       discrete_power_law_loglik, estimate_np, estimate_np_series, fit_growth_exponent,
                       fit_power_law, fit_scaling, fit_weibull_rank, scaling_sweep, weibull_ccdf,
                       weibull_ccdf_deviation)
from model import ModelParams

C_GRID = np.round(np.arange(0.01, 1.0, 0.01), 2)


class Counter:
    def __init__(self):
        self.count = 0

    def update(self, n):
        self.count += n


class TestScalingFit:
    def test_exact_power(self):
        points = [(n, 3.0 * n ** 2) for n in range(2, 12)]
        fit = fit_scaling(points)
        assert fit.beta == pytest.approx(2.0, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.n_points == 10

    def test_scale_covariance(self, rng):
        n = rng.integers(5, 200, size=40)
        m = n ** 1.7 * np.exp(rng.normal(0, 0.1, size=40))
        base = fit_scaling(zip(n, m))
        scaled = fit_scaling(zip(n, 5.0 * m))
        assert scaled.beta == pytest.approx(base.beta, abs=1e-10)
        assert scaled.intercept == pytest.approx(base.intercept + math.log(5.0), abs=1e-10)

    def test_small_points_are_dropped(self):
        points = [(1, 1), (0, 0), (5, 0), (2, 4), (4, 16), (8, 64)]
        fit = fit_scaling(points)
        assert fit.n_points == 3
        assert fit.beta == pytest.approx(2.0)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_scaling([(2, 3), (4, 9)])

    def test_single_n_value(self):
        with pytest.raises(InsufficientDataError):
            fit_scaling([(5, 3), (5, 4), (5, 6)])


class TestWeibull:
    def test_ccdf_value(self):
        assert weibull_ccdf(0.5, 10.0, 10.0) == pytest.approx(math.exp(-1.0))

    def test_recovers_parameters(self):
        rng = np.random.default_rng(2024)
        samples = 10.0 * rng.weibull(0.5, 100_000)
        fit = fit_weibull_rank(samples, C_GRID)
        assert fit.c == pytest.approx(0.5, abs=0.05)
        assert fit.lambda_ == pytest.approx(10.0, rel=0.1)
        assert fit.beta_coef == pytest.approx(fit.lambda_ ** fit.c, rel=1e-9)
        assert fit.r2 > 0.99
        assert fit.n_used >= 10
        assert weibull_ccdf_deviation(fit, samples) < 0.1

    def test_too_few_samples(self, rng):
        with pytest.raises(InsufficientDataError):
            fit_weibull_rank(rng.weibull(0.5, 49) + 0.1, C_GRID)

    def test_identical_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_weibull_rank(np.full(100, 3.0), C_GRID)

    def test_bad_grid(self, rng):
        with pytest.raises(ParameterError):
            fit_weibull_rank(rng.weibull(0.5, 200) + 0.1, [0.5, 1.5])


class TestPowerLaw:
    def test_recovers_exponent(self):
        rng = np.random.default_rng(99)
        samples = discrete_power_law(2.7, 10_000, rng)
        fit = fit_power_law(samples)
        assert fit.exponent == pytest.approx(2.7, abs=0.1)
        assert fit.n_tail >= 50
        assert fit.ks < 0.05

    def test_estimate_is_likelihood_maximum(self):
        rng = np.random.default_rng(5)
        samples = discrete_power_law(2.2, 5_000, rng)
        fit = fit_power_law(samples)
        best = discrete_power_law_loglik(fit.exponent, samples, fit.x_min)
        for step in (-1e-3, 1e-3):
            assert discrete_power_law_loglik(fit.exponent + step, samples, fit.x_min) < best

    def test_identical_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_power_law(np.full(100, 5))

    def test_too_few_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_power_law(np.arange(1, 40))

    def test_rejects_non_integers(self):
        with pytest.raises(ParameterError):
            fit_power_law(np.linspace(1.5, 90.5, 60))


class TestGrowthExponent:
    def test_square_root_curve(self):
        t = np.arange(1, 101)
        curve = pd.DataFrame({'t': t - 1, 'k_norm': np.sqrt(t / t[-1])})
        assert fit_growth_exponent(curve) == pytest.approx(0.5, abs=1e-10)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            fit_growth_exponent(pd.DataFrame({'t': [0, 1], 'k_norm': [0.5, 1.0]}), trim=0.0)


@pytest.fixture
def hist_params():
    return ModelParams(burn_in=60)


def tiny_histogram(grid, params, replicates=25, smoothing=1.0, workers=1, progress=None):
    return build_conditional_histogram(grid, params, replicates, (5, 5), smoothing=smoothing, seed=3,
                                       days=1, burn_in=60, workers=workers, progress=progress)


class TestConditionalHistogram:
    def test_rows_are_distributions(self, hist_params):
        hist = tiny_histogram([20, 40, 60], hist_params)
        assert hist.prob.shape[0] == 3
        assert np.allclose(hist.prob.sum(axis=(1, 2)), 1.0)
        assert np.all(hist.prob > 0)

    def test_no_smoothing_gives_frequencies(self, hist_params):
        hist = tiny_histogram([20, 40], hist_params, replicates=20, smoothing=0.0)
        counts = hist.prob * 20
        assert np.allclose(counts, np.round(counts))
        assert np.allclose(hist.prob.sum(axis=(1, 2)), 1.0)

    def test_grid_order_does_not_matter(self, hist_params):
        first = tiny_histogram([40, 20], hist_params)
        second = tiny_histogram([20, 40, 20], hist_params)
        assert first.n_p_grid == second.n_p_grid == (20, 40)
        assert np.array_equal(first.prob, second.prob)

    def test_progress_counts_cells(self, hist_params):
        progress = Counter()
        tiny_histogram([20, 30], hist_params, replicates=4, progress=progress)
        assert progress.count == 8

    def test_workers_match_serial(self, hist_params):
        serial = tiny_histogram([20, 30], hist_params, replicates=4)
        pooled = tiny_histogram([20, 30], hist_params, replicates=4, workers=2)
        assert np.array_equal(serial.prob, pooled.prob)

    def test_single_grid_value(self, hist_params):
        hist = tiny_histogram([30], hist_params, replicates=10)
        estimate = estimate_np(hist, hist.n_lo, hist.m_lo)
        assert estimate.n_p_ml == 30
        assert not estimate.flat_flag

    def test_bad_widths(self, hist_params):
        with pytest.raises(ParameterError):
            build_conditional_histogram([20], hist_params, 2, (0, 5))


class TestEstimateNp:
    def hist(self):
        prob = np.array([[[0.5], [0.5]], [[0.5], [0.5]], [[0.2], [0.8]]])
        return ConditionalHistogram(n_p_grid=(10, 20, 30), w_n=5.0, w_m=5.0, n_lo=0.0, m_lo=0.0,
                                    prob=prob, replicates=1, smoothing=0.0, params_fingerprint='test')

    def test_ties_pick_smallest(self):
        estimate = estimate_np(self.hist(), 3, 4)
        assert estimate.n_p_ml == 10
        assert estimate.flat_flag
        assert estimate.log_likelihood == pytest.approx(math.log(0.5))

    def test_clear_maximum(self):
        estimate = estimate_np(self.hist(), 7, 2)
        assert estimate.n_p_ml == 30
        assert not estimate.flat_flag
        assert estimate.log_likelihood == pytest.approx(math.log(0.8))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            estimate_np(self.hist(), 10, 0)

    def test_declining_activity_gives_declining_estimates(self):
        # row k of this histogram peaks on the diagonal bin (k, k)
        grid = (100, 150, 200, 250, 300)
        i, j = np.meshgrid(np.arange(5), np.arange(5), indexing='ij')
        prob = np.stack([np.exp(-((i - k) ** 2 + (j - k) ** 2)) for k in range(5)])
        prob /= prob.sum(axis=(1, 2), keepdims=True)
        hist = ConditionalHistogram(n_p_grid=grid, w_n=5.0, w_m=5.0, n_lo=0.0, m_lo=0.0, prob=prob,
                                    replicates=1, smoothing=0.0, params_fingerprint='test')
        # chains of 22, 17, 12, 7 and 2 edges land in bins 4 down to 0
        series = make_series([{(k, k + 1): 1.0 for k in range(1, length + 1)} for length in (22, 17, 12, 7, 2)])
        estimates = [estimate.n_p_ml for _, estimate in estimate_np_series(hist, series)]
        assert estimates == [300, 250, 200, 150, 100]

    def test_series_keeps_out_of_range_days(self):
        series = make_series([{(1, 2): 1.0, (3, 4): 1.0, (5, 6): 1.0}, {(k, k + 1): 1.0 for k in range(1, 12)}])
        estimates = estimate_np_series(self.hist(), series)
        assert [day for day, _ in estimates] == [0, 1]
        assert estimates[0][1].n_p_ml == 30
        assert estimates[1][1] == OutOfRange(n=12, m=11)


class TestSweep:
    def test_rows_per_grid_value(self):
        params = ModelParams(burn_in=30)
        frame = scaling_sweep([30, 10, 20], params, days=5, seed=1)
        assert list(frame.columns) == ['n_p', 'day', 'n', 'm']
        assert len(frame) == 15
        assert list(frame['n_p'].unique()) == [10, 20, 30]
        assert (frame['n'] <= frame['n_p']).all()

    def test_deterministic(self):
        params = ModelParams(burn_in=30)
        first = scaling_sweep([15, 25], params, days=4, seed=8)
        second = scaling_sweep([25, 15], params, days=4, seed=8)
        pd.testing.assert_frame_equal(first, second)

    def test_bad_days(self):
        with pytest.raises(ParameterError):
            scaling_sweep([10], ModelParams(), days=0)


def test_power_law_score_vanishes_at_estimate():
    rng = np.random.default_rng(31)
    samples = discrete_power_law(2.5, 5_000, rng)
    fit = fit_power_law(samples)
    h = 1e-5
    score = (discrete_power_law_loglik(fit.exponent + h, samples, fit.x_min)
             - discrete_power_law_loglik(fit.exponent - h, samples, fit.x_min)) / (2 * h)
    assert abs(score) < 1e-6
