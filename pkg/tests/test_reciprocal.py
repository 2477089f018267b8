import math

import numpy as np
import pytest

from recfosm.distributions import Distribution, from_mean_cov
from recfosm.errors import (
    DivisionDomainError,
    EstimatorUndefinedError,
    ParameterDomainError,
    QuadratureError,
    UnsupportedSupportError,
)
from recfosm.inputs import RandomInput
from recfosm.numerics import integrate_semi_infinite
from recfosm.reciprocal import (
    ReciprocalMoments,
    Source,
    empirical_reciprocal_moments,
    reciprocal_analytic,
    reciprocal_moments,
    reciprocal_moments_for,
    reciprocal_moments_quadrature,
    reciprocal_pdf,
    sampled_reciprocal_moments,
)


def _f_var(m, n):
    return 2 * n**2 * (m + n - 2) / (m * (n - 2) ** 2 * (n - 4))


def _mc_mean_var(dist, n=10**6, seed=0):
    z = 1.0 / dist.sample(n, seed)
    mean, var = z.mean(), z.var(ddof=1)
    dev = z - mean
    se_var = math.sqrt((np.mean(dev**4) - np.mean(dev**2) ** 2) / n)
    return mean, var, z.std(ddof=1) / math.sqrt(n), se_var


class TestReciprocalMomentsType:
    def test_rejects_non_psd(self):
        with pytest.raises(ParameterDomainError):
            ReciprocalMoments([1.0, 1.0], [[1.0, 2.0], [2.0, 1.0]], Source.EMPIRICAL)

    def test_rejects_asymmetric(self):
        with pytest.raises(ParameterDomainError):
            ReciprocalMoments([1.0, 1.0], [[1.0, 0.5], [0.0, 1.0]], Source.EMPIRICAL)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ParameterDomainError):
            ReciprocalMoments([1.0], [[1.0, 0.0], [0.0, 1.0]], Source.EMPIRICAL)

    def test_to_dict(self):
        rm = ReciprocalMoments([0.5], [[0.1]], "Quadrature", {"evaluations": 3})
        assert rm.to_dict() == {"mean_z": [0.5], "cov_z": [[0.1]], "source": "Quadrature",
                                "diagnostics": {"evaluations": 3}}


class TestReciprocalPdf:
    def test_uniform(self):
        f = reciprocal_pdf(Distribution.uniform(1, 2))
        assert f(0.75) == pytest.approx(1 / 0.75**2)
        assert f(0.4) == 0.0 and f(1.1) == 0.0

    def test_weibull_outside_support(self):
        f = reciprocal_pdf(Distribution.weibull(3, 5))
        assert f(-1.0) == 0.0 and f(0.0) == 0.0

    @pytest.mark.parametrize("dist", [
        Distribution.fisher_f(25, 100),
        Distribution.weibull(3, 5),
        Distribution.gamma(5, 2),
        Distribution.lognormal(0, 0.4),
        Distribution.uniform(1, 2),
        from_mean_cov("Weibull", 30, 0.01),
    ], ids=str)
    def test_normalization(self, dist):
        res = integrate_semi_infinite(reciprocal_pdf(dist), 1e-10,
                                      [1.0 / x for x in dist.inverse_cdf(np.array([0.01, 0.5, 0.99]))])
        assert res.value == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("dist", [Distribution.normal(1, 1), Distribution.uniform(-1, 2)], ids=str)
    def test_support_crossing_zero(self, dist):
        with pytest.raises(UnsupportedSupportError):
            reciprocal_pdf(dist)


class TestQuadrature:
    def test_f_pair(self):
        rm = reciprocal_moments_quadrature(Distribution.fisher_f(25, 100))
        assert rm.mean_z[0] == pytest.approx(25 / 23, abs=1e-6)
        assert rm.var_z[0] == pytest.approx(_f_var(100, 25), abs=1e-6)
        assert rm.source is Source.QUADRATURE
        assert rm.diagnostics["normalization_error"] < 1e-8

    def test_uniform(self):
        rm = reciprocal_moments_quadrature(Distribution.uniform(1, 2))
        assert rm.mean_z[0] == pytest.approx(math.log(2), rel=1e-9)
        assert rm.var_z[0] == pytest.approx(0.5 - math.log(2) ** 2, rel=1e-8)

    def test_gamma_closed_form(self):
        # 1/X for X ~ Gamma(k, rate r) is inverse-gamma: mean r/(k-1), var r^2/((k-1)^2 (k-2))
        k, r = 6.0, 2.0
        rm = reciprocal_moments_quadrature(Distribution.gamma(k, r))
        assert rm.mean_z[0] == pytest.approx(r / (k - 1), rel=1e-9)
        assert rm.var_z[0] == pytest.approx(r**2 / ((k - 1) ** 2 * (k - 2)), rel=1e-8)

    def test_lognormal_closed_form(self):
        mu, s = 0.7, 0.3
        rm = reciprocal_moments_quadrature(Distribution.lognormal(mu, s))
        assert rm.mean_z[0] == pytest.approx(math.exp(-mu + s * s / 2), rel=1e-9)
        assert rm.var_z[0] == pytest.approx(math.expm1(s * s) * math.exp(-2 * mu + s * s), rel=1e-8)

    def test_weibull_rate_shape_vs_mc(self):
        dist = Distribution.weibull(3, 5)
        rm = reciprocal_moments_quadrature(dist)
        mean, var, se_mean, se_var = _mc_mean_var(dist)
        assert abs(rm.mean_z[0] - mean) < 3 * se_mean
        assert abs(rm.var_z[0] - var) < 3 * se_var

    def test_low_cov_peak(self):
        dist = from_mean_cov("LogNormal", 30, 0.001)
        rm = reciprocal_moments_quadrature(dist)
        s2 = math.log1p(1e-6)
        assert rm.mean_z[0] == pytest.approx(math.exp(s2) / 30, rel=1e-9)

    @pytest.mark.parametrize("dist", [Distribution.weibull(1, 1.5), Distribution.fisher_f(4, 10),
                                      Distribution.gamma(1.5, 3)], ids=str)
    def test_divergent_variance(self, dist):
        with pytest.raises(QuadratureError, match="variance"):
            reciprocal_moments_quadrature(dist)

    def test_divergent_mean(self):
        with pytest.raises(QuadratureError, match="mean"):
            reciprocal_moments_quadrature(Distribution.fisher_f(2, 10))

    def test_support_at_zero(self):
        with pytest.raises(UnsupportedSupportError):
            reciprocal_moments_quadrature(Distribution.normal(10, 1))

    def test_deterministic(self):
        a = reciprocal_moments_quadrature(Distribution.weibull(3, 5))
        b = reciprocal_moments_quadrature(Distribution.weibull(3, 5))
        assert a.mean_z[0] == b.mean_z[0] and a.var_z[0] == b.var_z[0]


class TestAnalyticPair:
    def test_f_swap(self):
        assert reciprocal_analytic(Distribution.fisher_f(25, 100)) == Distribution.fisher_f(100, 25)

    def test_scale(self):
        assert reciprocal_analytic(Distribution.fisher_f(25, 100, scale=70)) == \
            Distribution.fisher_f(100, 25, scale=1 / 70)

    def test_involution(self):
        d = Distribution.fisher_f(7, 13, scale=3.3)
        back = reciprocal_analytic(reciprocal_analytic(d))
        assert back.params == d.params
        assert back.scale == pytest.approx(d.scale, rel=1e-12)

    def test_weibull_absent(self):
        assert reciprocal_analytic(Distribution.weibull(3, 5)) is None

    def test_shifted_f_absent(self):
        assert reciprocal_analytic(Distribution.fisher_f(25, 100, shift=1)) is None

    def test_dispatch(self):
        assert reciprocal_moments(Distribution.fisher_f(25, 100)).source is Source.ANALYTIC_PAIR
        assert reciprocal_moments(Distribution.weibull(3, 5)).source is Source.QUADRATURE

    @pytest.mark.parametrize("m, n", [(25, 100), (10, 12), (6, 30)])
    def test_oracle_triangle(self, m, n):
        d = Distribution.fisher_f(m, n)
        pair = reciprocal_moments(d)
        quad = reciprocal_moments_quadrature(d)
        assert quad.mean_z[0] == pytest.approx(pair.mean_z[0], rel=1e-6)
        assert quad.var_z[0] == pytest.approx(pair.var_z[0], rel=1e-6)
        mean, var, se_mean, se_var = _mc_mean_var(d, seed=11)
        assert abs(pair.mean_z[0] - mean) < 3 * se_mean
        assert abs(pair.var_z[0] - var) < 3 * se_var


class TestEmpirical:
    def test_constant(self):
        rm = empirical_reciprocal_moments([[2.0], [2.0], [2.0]])
        assert rm.mean_z.tolist() == [0.5]
        assert rm.cov_z.tolist() == [[0.0]]
        assert rm.source is Source.EMPIRICAL

    def test_hand_computed(self):
        rm = empirical_reciprocal_moments([[1.0], [2.0]])
        assert rm.mean_z[0] == 0.75
        assert rm.cov_z[0, 0] == 0.125

    def test_zero_entry(self):
        with pytest.raises(DivisionDomainError) as err:
            empirical_reciprocal_moments([[1.0, 2.0], [3.0, 0.0], [1.0, 1.0]])
        assert (err.value.row, err.value.column) == (1, 1)

    def test_mixed_sign(self):
        with pytest.raises(UnsupportedSupportError):
            empirical_reciprocal_moments([[1.0], [-2.0], [3.0]])

    def test_negative_column_allowed(self):
        rm = empirical_reciprocal_moments([[-1.0], [-2.0]])
        assert rm.mean_z[0] == -0.75

    def test_single_row(self):
        with pytest.raises(EstimatorUndefinedError):
            empirical_reciprocal_moments([[1.0, 2.0]])

    def test_matches_reference(self):
        x = np.random.default_rng(3).uniform(0.5, 3.0, (257, 3))
        rm = empirical_reciprocal_moments(x)
        z = 1.0 / x
        np.testing.assert_array_equal(rm.mean_z, z.mean(axis=0))
        np.testing.assert_array_equal(rm.cov_z, np.cov(z, rowvar=False, ddof=1))

    def test_symmetric_psd(self):
        x = np.random.default_rng(4).gamma(5.0, 1.0, (100, 4))
        rm = empirical_reciprocal_moments(x)
        np.testing.assert_array_equal(rm.cov_z, rm.cov_z.T)
        assert np.linalg.eigvalsh(rm.cov_z).min() > -1e-10

    def test_mixed_substitution(self):
        x = np.array([[1.0, 10.0], [2.0, 20.0], [4.0, 30.0]])
        rm = empirical_reciprocal_moments(x, [True, False])
        assert rm.mean_z.tolist() == pytest.approx([(1 + 0.5 + 0.25) / 3, 20.0])
        assert rm.reciprocal == (True, False)

    def test_weibull_draws_vs_quadrature(self):
        d = Distribution.weibull(3, 5)
        x = d.sample(10**6, 21)
        rm = empirical_reciprocal_moments(x)
        quad = reciprocal_moments_quadrature(d)
        se = math.sqrt(rm.cov_z[0, 0] / x.size)
        assert abs(rm.mean_z[0] - quad.mean_z[0]) < 3 * se


class TestSampled:
    def test_independent_offdiagonal(self):
        inp = RandomInput.independent([Distribution.gamma(10, 1), Distribution.weibull(1, 4)])
        rm = sampled_reciprocal_moments(inp, 10**6, 5)
        assert rm.source is Source.SAMPLED
        c = rm.cov_z
        se = math.sqrt(c[0, 0] * c[1, 1] / 10**6)
        assert abs(c[0, 1]) < 3 * se

    def test_f_matches_pair(self):
        d = Distribution.fisher_f(25, 100)
        rm = sampled_reciprocal_moments(RandomInput.independent([d]), 10**6, 9)
        pair = reciprocal_moments(d)
        assert abs(rm.mean_z[0] - pair.mean_z[0]) < 3 * math.sqrt(rm.cov_z[0, 0] / 10**6)

    def test_count_one(self):
        with pytest.raises(EstimatorUndefinedError):
            sampled_reciprocal_moments(RandomInput.independent([Distribution.gamma(3, 1)]), 1, 0)

    def test_correlated_route(self):
        corr = [[1.0, 0.6], [0.6, 1.0]]
        inp = RandomInput.correlated([Distribution.gamma(20, 1), Distribution.gamma(30, 2)], corr)
        rm = reciprocal_moments_for(inp, count=10**5, seed=1)
        assert rm.source is Source.SAMPLED
        rho = rm.cov_z[0, 1] / math.sqrt(rm.cov_z[0, 0] * rm.cov_z[1, 1])
        assert 0.5 < rho < 0.7

    def test_independent_route(self):
        inp = RandomInput.independent([Distribution.fisher_f(25, 100), Distribution.weibull(3, 5)])
        rm = reciprocal_moments_for(inp)
        assert rm.cov_z[0, 1] == 0.0
        assert rm.mean_z[0] == pytest.approx(25 / 23)

    def test_data_route(self):
        inp = RandomInput.from_samples([[1.0], [2.0]])
        assert reciprocal_moments_for(inp).source is Source.EMPIRICAL
