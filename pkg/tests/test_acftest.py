"""Autocorrelation residual statistic and its Monte Carlo experiments."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from semicov.acftest import (
    CLaw,
    empirical_acf,
    sum_of_residuals,
    t_distribution_mc,
    table1_experiment,
    theoretical_acf,
)
from semicov.errors import DegenerateSeriesError, InvalidParameterError
from semicov.kernels import multi_jump_exp, nugget_ou, ou
from semicov.simulate import sample_increments


class TestEmpiricalAcf:
    def test_lag_zero_is_one(self):
        rho = empirical_acf(np.random.default_rng(0).standard_normal(50))
        assert rho[0] == pytest.approx(1.0)

    def test_alternating_series_exact_value(self):
        """x_t = (-1)^t has mean zero and rho_hat(1) = -(n-1)/n under the
        biased estimator."""
        n = 64
        x = (-1.0) ** np.arange(n)
        rho = empirical_acf(x, max_lag=1)
        assert_allclose(rho[1], -(n - 1) / n, rtol=1e-14)

    def test_full_lag_sum_identity(self):
        """Centering forces all positive-lag estimates to sum to -1/2."""
        x = np.random.default_rng(7).standard_normal(200)
        rho = empirical_acf(x)
        assert_allclose(rho[1:].sum(), -0.5, atol=1e-12)

    def test_white_noise_band(self):
        n = 6000
        x = np.random.default_rng(11).standard_normal(n)
        rho = empirical_acf(x, max_lag=100)
        assert np.all(np.abs(rho[1:]) < 3.0 / math.sqrt(n))

    def test_degenerate_series_rejected(self):
        with pytest.raises(DegenerateSeriesError):
            empirical_acf(np.ones(10))
        with pytest.raises(DegenerateSeriesError):
            empirical_acf([1.0])

    def test_max_lag_bounds(self):
        with pytest.raises(InvalidParameterError):
            empirical_acf(np.arange(5.0), max_lag=5)


class TestTheoreticalAcf:
    def test_ou_decay(self):
        rho = theoretical_acf(ou(0.1), 3)
        assert_allclose(rho, np.exp(-0.1 * np.arange(4)), rtol=1e-14)

    def test_jump_kernel_uses_band_heights(self):
        rho = theoretical_acf(multi_jump_exp(0.8, ((2.0, 0.5),), 0.1), 3)
        assert rho[0] == 1.0
        assert_allclose(rho[1], 0.8 * math.exp(-0.1), rtol=1e-14)
        assert_allclose(rho[2], 0.5 * math.exp(-0.2), rtol=1e-14)

    def test_scale_invariance(self):
        a = theoretical_acf(ou(0.3, sigma2=1.0), 5)
        b = theoretical_acf(ou(0.3, sigma2=7.5), 5)
        assert_allclose(a, b, rtol=1e-14)


class TestSumOfResiduals:
    def test_statistic_aggregates_absolute_gaps(self):
        x = sample_increments(ou(0.5), 80, 1, seed=2).increments[0]
        stat = sum_of_residuals(ou(0.5), x, max_lag=20)
        want = np.abs(stat.theoretical - stat.empirical).sum()
        assert stat.t_value == pytest.approx(want)
        assert stat.n == 80
        assert list(stat.lags) == list(range(21))

    def test_nugget_misfit_raises_t(self):
        """Scoring a jump-free model against nugget data inflates T."""
        x = sample_increments(nugget_ou(0.2, 0.01), 100, 1, seed=5).increments[0]
        t_true = sum_of_residuals(nugget_ou(0.2, 0.01), x).t_value
        t_wrong = sum_of_residuals(ou(0.01), x).t_value
        assert t_wrong > t_true

    def test_longer_series_shrink_the_residual(self):
        """The statistic over a fixed lag window falls as n grows."""
        k = ou(0.01)
        means = {}
        for n in (100, 2000):
            ts = []
            for i in range(3):
                x = sample_increments(k, n, 1, seed=1000 + i).increments[0]
                ts.append(sum_of_residuals(k, x, max_lag=min(100, n - 1)).t_value)
            means[n] = np.mean(ts)
        assert means[2000] < means[100] / 2.0


class TestHeightLaws:
    def test_uniform_law_sample(self):
        sample = t_distribution_mc(60, 0.05, 40, seed=1)
        assert sample.heights.shape == (40, 1)
        assert sample.t_values.shape == (40,)
        assert np.all((sample.heights > 0.0) & (sample.heights <= 1.0))
        assert not sample.high_rejection

    def test_gamma_law_rejects_most_draws(self):
        """Gamma(2,1) mass above one is ~73.6%, so the truncation flag
        must come up."""
        sample = t_distribution_mc(60, 0.05, 40, seed=2, c_law=CLaw.GAMMA_TRUNC)
        assert sample.high_rejection
        assert sample.rejected > 40
        assert np.all((sample.heights > 0.0) & (sample.heights <= 1.0))

    def test_lattice_laws(self):
        poisson = t_distribution_mc(60, 0.05, 30, seed=3,
                                    c_law=CLaw.POISSON_SCALED)
        lattice = np.round(poisson.heights * 10.0)
        assert_allclose(poisson.heights * 10.0, lattice, atol=1e-12)
        binom = t_distribution_mc(60, 0.05, 30, seed=4,
                                  c_law="binomial_scaled")
        assert np.all(binom.heights <= 1.0)

    def test_nested_draws_decrease(self):
        sample = t_distribution_mc(100, 0.05, 25, seed=5, n_jumps=3)
        assert sample.heights.shape == (25, 3)
        assert np.all(np.diff(sample.heights, axis=1) < 0.0)

    def test_nested_draws_require_uniform_law(self):
        with pytest.raises(InvalidParameterError):
            t_distribution_mc(60, 0.05, 10, seed=6, n_jumps=2,
                              c_law=CLaw.GAMMA_TRUNC)

    def test_determinism_across_workers(self):
        a = t_distribution_mc(60, 0.05, 20, seed=9, workers=1)
        b = t_distribution_mc(60, 0.05, 20, seed=9, workers=4)
        assert np.array_equal(a.heights, b.heights)
        assert np.array_equal(a.t_values, b.t_values)


class TestScenarioTable:
    def test_layout_and_reproducibility(self):
        rows = table1_experiment(8, seed=20)
        assert len(rows) == 19
        singles = [row for row in rows if row.scenario == "1 jump"]
        assert [row.value for row in singles] == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        again = table1_experiment(8, seed=20, workers=3)
        for a, b in zip(rows, again):
            assert a == b

    def test_every_row_is_populated(self):
        for row in table1_experiment(5, seed=21):
            assert row.replicates == 5
            assert row.mean_t > 0.0
            assert row.std_error > 0.0
            assert row.n_jumps in (1, 2, 3, 4)
