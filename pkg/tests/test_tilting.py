import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special, stats

from subexp_ldp.errors import DomainError
from subexp_ldp.free_energy import exp_power_model, gauss_power_model, numeric_model, sym_gamma_power_model
from subexp_ldp.scaling import DistributionModel, make_stream, phi
from subexp_ldp.tilting import log_weight, optimal_tilt, sample_tilted, tilted_law

EXP = exp_power_model(2)
GAUSS = gauss_power_model(4)
N = 10 ** 6


def exp_tilted_cdf(eta):
    """CDF of the density proportional to exp(eta y - |y|)."""
    w_pos = (1 + eta) / 2

    def cdf(y):
        y = np.asarray(y, dtype=float)
        neg = (1 - w_pos) * np.exp(np.minimum(y, 0) * (1 + eta))
        pos = (1 - w_pos) + w_pos * -np.expm1(-np.maximum(y, 0) * (1 - eta))
        return np.where(y < 0, neg, pos)

    return cdf


def gauss_tilted_cdf(eta):
    """CDF of sign(G) G^2 under the density proportional to exp(eta g|g| - g^2/2)."""
    a, b = (1 - 2 * eta) ** -0.5, (1 + 2 * eta) ** -0.5
    w_pos = a / (a + b)

    def cdf(y):
        y = np.asarray(y, dtype=float)
        r = np.sqrt(np.abs(y))
        neg = (1 - w_pos) * 2 * special.ndtr(-r * math.sqrt(1 + 2 * eta))
        pos = (1 - w_pos) + w_pos * (2 * special.ndtr(r * math.sqrt(1 - 2 * eta)) - 1)
        return np.where(y < 0, neg, pos)

    return cdf


class TestOptimalTilt:
    def test_quadratic_oracle(self):
        assert optimal_tilt(EXP, 100, 1.0) == pytest.approx((math.sqrt(101) - 1) / 10, rel=1e-12)

    def test_increasing_in_n_and_approaches_xi(self):
        etas = [optimal_tilt(EXP, n, 1.0) for n in (10 ** 2, 10 ** 4, 10 ** 6)]
        assert etas[0] < etas[1] < etas[2] < 1.0
        assert 1.0 - etas[2] < 1e-2

    def test_increasing_in_x(self):
        assert optimal_tilt(GAUSS, 50, 1.0) < optimal_tilt(GAUSS, 50, 2.0)

    def test_validates(self):
        with pytest.raises(ValueError):
            optimal_tilt(EXP, 0, 1.0)
        with pytest.raises(ValueError):
            optimal_tilt(EXP, 10, -1.0)


class TestLogWeight:
    def test_zero_tilt(self):
        law = tilted_law(EXP.dist, EXP, 0.0)
        assert_allclose(log_weight(law, np.array([-3.0, 0.0, 7.0])), 0.0)

    def test_at_origin(self):
        law = tilted_law(EXP.dist, EXP, 0.5)
        assert log_weight(law, 0.0) == pytest.approx(EXP.lam(0.5))

    def test_value(self):
        law = tilted_law(EXP.dist, EXP, 0.5)
        assert log_weight(law, 4.0) == pytest.approx(-0.5 * 2 - math.log(0.75), rel=1e-14)

    def test_change_of_measure(self):
        law = tilted_law(GAUSS.dist, GAUSS, 0.3)
        base = GAUSS.dist
        for h in (lambda y: 1.0, lambda y: math.cos(y), lambda y: float(y > 1.0), lambda y: math.atan(y)):
            def lhs(y):
                return h(y) * math.exp(law.log_density(y) + log_weight(law, y))

            def rhs(y):
                return h(y) * base.density(y)

            parts = [(-np.inf, -1), (-1, 0), (0, 1), (1, np.inf)]
            a = sum(integrate.quad(lhs, lo, hi, limit=200)[0] for lo, hi in parts)
            b = sum(integrate.quad(rhs, lo, hi, limit=200)[0] for lo, hi in parts)
            assert a == pytest.approx(b, abs=1e-7)


class TestTiltedDensity:
    @pytest.mark.parametrize("model,eta", [(EXP, 0.5), (EXP, 0.9), (GAUSS, 0.3), (GAUSS, 0.45)])
    def test_integrates_to_one(self, model, eta):
        law = tilted_law(model.dist, model, eta)
        parts = [(-np.inf, -1), (-1, 0), (0, 1), (1, np.inf)]
        total = sum(integrate.quad(law.density, lo, hi, limit=400, epsabs=1e-12)[0] for lo, hi in parts)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_domain_checked(self):
        with pytest.raises(DomainError):
            tilted_law(EXP.dist, EXP, 1.0)


class RootExponential(DistributionModel):
    """Density exp(-sqrt|x|)/4, known to the toolkit only through its log-density."""

    has_closed_tail = False

    def logpdf(self, x):
        return -np.sqrt(np.abs(np.asarray(x, dtype=float))) - math.log(4.0)


def _ks(draws, cdf):
    return stats.kstest(draws, cdf).statistic


class TestExactSamplers:
    @pytest.mark.parametrize("eta", [0.0, 0.5, 0.9])
    def test_exp_ks(self, eta):
        law = tilted_law(EXP.dist, EXP, eta)
        assert law.exact
        _, u = law.sample_scaled(make_stream(101), N)
        assert _ks(u, exp_tilted_cdf(eta)) <= 0.002

    @pytest.mark.parametrize("eta", [0.0, 0.3, 0.49])
    def test_gauss_ks(self, eta):
        law = tilted_law(GAUSS.dist, GAUSS, eta)
        assert law.exact
        _, u = law.sample_scaled(make_stream(102), N)
        assert _ks(u, gauss_tilted_cdf(eta)) <= 0.002

    @pytest.mark.parametrize("model,eta", [(EXP, 0.5), (GAUSS, 0.3), (sym_gamma_power_model(2, 3.0), 0.6)],
                             ids=["exp", "gauss", "gamma"])
    def test_mean_and_variance(self, model, eta):
        law = tilted_law(model.dist, model, eta)
        x, u = law.sample_scaled(make_stream(103), N)
        assert_allclose(phi(model.alpha, x), u, rtol=1e-10)
        m, v = model.lam_prime(eta), model.lam_second(eta)
        assert abs(u.mean() - m) <= 4 * math.sqrt(v / N)
        # SE of the sample variance from the fourth central moment of the draws
        se_v = math.sqrt((np.mean((u - m) ** 4) - v * v) / N)
        assert abs(u.var() - v) <= 5 * se_v

    def test_zero_tilt_is_base_law(self):
        law = tilted_law(EXP.dist, EXP, 0.0)
        x = law.sample(make_stream(104), N)
        def cdf(z):
            t = EXP.dist.tail(np.abs(z))
            return np.where(z < 0, t, 1 - t)

        assert _ks(x, cdf) <= 0.002

    def test_sample_tilted_scalar_and_array(self):
        law = tilted_law(GAUSS.dist, GAUSS, 0.2)
        assert isinstance(sample_tilted(law, make_stream(1)), float)
        assert sample_tilted(law, make_stream(1), 10).shape == (10,)


class TestGenericSampler:
    @pytest.mark.parametrize("model,eta,cdf", [(EXP, 0.5, exp_tilted_cdf(0.5)), (EXP, 0.95, exp_tilted_cdf(0.95)),
                                               (GAUSS, 0.3, gauss_tilted_cdf(0.3)),
                                               (GAUSS, 0.49, gauss_tilted_cdf(0.49))])
    def test_matches_exact_law(self, model, eta, cdf):
        law = tilted_law(model.dist, model, eta, generic=True)
        assert not law.exact or law._table is not None
        assert law._table.log_total == pytest.approx(model.lam(eta), abs=1e-9)
        _, u = law.sample_scaled(make_stream(105), N)
        assert _ks(u, cdf) <= 0.002

    def test_density_only_law(self):
        d = RootExponential()
        fe = numeric_model(d, 0.5)
        assert fe.xi == pytest.approx(1.0, rel=2e-3)
        eta = 0.6
        law = tilted_law(d, fe, eta)
        assert not law.exact
        _, u = law.sample_scaled(make_stream(106), 2 * 10 ** 5)
        # sqrt|X| has density u e^{-u} on each side: a symmetrized Gamma(2)
        oracle = sym_gamma_power_model(2, 2.0)
        assert law.log_normalizer == pytest.approx(oracle.lam(eta), abs=1e-6)
        assert abs(u.mean() - oracle.lam_prime(eta)) <= 4 * math.sqrt(oracle.lam_second(eta) / u.size)
