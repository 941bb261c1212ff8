import numpy as np
import pytest
from scipy import integrate, special

from errors import DomainError, ParameterError
from model import simulate_untyped_nm
from theory import (beta_function, curve_slope, expected_n_m, incomplete_beta, isolation_probability,
                    theoretical_scaling_curve)


def isolation_by_quadrature(n_p, alpha):
    value, _ = integrate.quad(lambda a: (1.0 - a ** alpha / (alpha + 1.0)) ** (n_p - 1), 0.0, 1.0,
                              epsabs=1e-13, epsrel=1e-11, limit=500)
    return value


class TestIncompleteBeta:
    @pytest.mark.parametrize('x,y', [(1.0, 1.0), (2.0, 3.0), (300.0, 0.25), (0.5, 0.5)])
    def test_full_range_is_complete_beta(self, x, y):
        assert incomplete_beta(1.0, x, y) == pytest.approx(beta_function(x, y), rel=1e-12)

    @pytest.mark.parametrize('z', [0.1, 0.5, 0.9])
    def test_uniform_shape(self, z):
        assert incomplete_beta(z, 1.0, 1.0) == pytest.approx(z, rel=1e-10)

    def test_half_two_two(self):
        assert incomplete_beta(0.5, 2.0, 2.0) == pytest.approx(1.0 / 12.0, rel=1e-10)

    @pytest.mark.parametrize('z,x,y', [
        (0.8, 10.0, 0.25), (0.8, 300.0, 0.25), (0.6667, 50.0, 0.5),
        (0.3, 2.5, 7.0), (0.95, 4.0, 1.5), (0.999, 1000.0, 0.2),
    ])
    def test_matches_scipy(self, z, x, y):
        expected = special.betainc(x, y, z) * special.beta(x, y)
        assert incomplete_beta(z, x, y) == pytest.approx(expected, rel=1e-8)

    def test_matches_quadrature(self):
        expected, _ = integrate.quad(lambda t: t ** 1.5 * (1.0 - t) ** 0.5, 0.0, 0.7)
        assert incomplete_beta(0.7, 2.5, 1.5) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize('z,x,y', [(0.0, 1.0, 1.0), (1.5, 1.0, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, -1.0)])
    def test_domain(self, z, x, y):
        with pytest.raises(DomainError):
            incomplete_beta(z, x, y)


class TestIsolationProbability:
    @pytest.mark.parametrize('alpha', [1.0, 2.0, 4.0, 7.5])
    def test_single_bank_is_always_isolated(self, alpha):
        assert isolation_probability(1, alpha) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize('n_p,alpha', [(2, 4.0), (10, 2.0), (300, 4.0), (2000, 4.0), (500, 1.0)])
    def test_matches_direct_integral(self, n_p, alpha):
        assert isolation_probability(n_p, alpha) == pytest.approx(isolation_by_quadrature(n_p, alpha), rel=1e-7)

    def test_large_market(self):
        # Tail term vanishes; only the complete beta function remains.
        q0 = isolation_probability(10000, 4.0)
        assert q0 == pytest.approx(0.25 * 5 ** 0.25 * beta_function(10000, 0.25), rel=1e-10)
        assert q0 == pytest.approx(0.1355, abs=1e-3)

    def test_decreasing_in_market_size(self):
        values = [isolation_probability(n, 4.0) for n in (1, 10, 100, 1000, 10000)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            isolation_probability(0, 4.0)
        with pytest.raises(DomainError):
            isolation_probability(10, 0.5)


class TestExpectedCounts:
    def test_two_banks(self):
        point = expected_n_m(2, 4.0)
        assert point.expected_m == pytest.approx(0.04)
        assert point.n_p == 2

    def test_monotone_in_market_size(self):
        points = theoretical_scaling_curve(range(2, 200, 7), 4.0)
        n = [p.expected_n for p in points]
        m = [p.expected_m for p in points]
        assert all(b > a for a, b in zip(n, n[1:]))
        assert all(b > a for a, b in zip(m, m[1:]))
        assert all(p.expected_n <= p.n_p for p in points)

    def test_curve_is_sorted_and_deduplicated(self):
        points = theoretical_scaling_curve([50, 10, 50, 30], 2.0)
        assert [p.n_p for p in points] == [10, 30, 50]

    def test_empty_grid(self):
        with pytest.raises(ParameterError):
            theoretical_scaling_curve([], 4.0)

    def test_agrees_with_simulation(self):
        n_p, alpha, replicates = 50, 2.0, 2000
        n, m = simulate_untyped_nm(n_p, alpha, replicates, seed=17)
        point = expected_n_m(n_p, alpha)
        assert abs(m.mean() - point.expected_m) <= 4 * m.std(ddof=1) / np.sqrt(replicates)
        assert abs(n.mean() - point.expected_n) <= 4 * n.std(ddof=1) / np.sqrt(replicates)


class TestSlope:
    def test_quadratic_regime_alpha_two(self):
        points = theoretical_scaling_curve(np.linspace(3000, 10000, 8).astype(int), 2.0)
        assert curve_slope(points) == pytest.approx(2.0, abs=0.05)

    def test_quadratic_regime_alpha_four(self):
        points = theoretical_scaling_curve(np.geomspace(1e7, 1e8, 6).astype(int), 4.0)
        assert curve_slope(points) == pytest.approx(2.0, abs=0.05)

    def test_slope_approaches_two_from_below(self):
        decades = [10 ** k for k in range(3, 8)]
        slopes = [curve_slope(theoretical_scaling_curve([lo, 10 * lo], 4.0)) for lo in decades]
        assert all(s < 2.0 for s in slopes)
        assert all(b > a for a, b in zip(slopes, slopes[1:]))

    def test_needs_two_points(self):
        with pytest.raises(ParameterError):
            curve_slope(theoretical_scaling_curve([10], 4.0))
