import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc, gamma

from tfcauchy.errors import DomainError, EvaluationError, ParameterError
from tfcauchy.special import (MLParams, inverse_subordinator_density, ml_eval,
                              ml_half_closed_form, ml_laplace_residual,
                              ml_uniform_decay_constant, mittag_leffler,
                              stable_density, stable_density_series,
                              stable_tail_constant, _ml_neg_integral, _ml_series)


def mp_series_oracle(alpha, beta, z):
    """Extended-precision reference: cancellation-adjusted series summation,
    switching to optimally-truncated asymptotics (plus the residue pair for
    alpha > 1) when the series would need thousands of digits."""
    import mpmath as mp
    w = abs(z) ** (1.0 / alpha)
    if w <= 200.0:
        need = int(w / 2.3) + 40
        with mp.workdps(need):
            s = mp.mpf(0)
            zz = mp.mpf(z)
            k = 0
            while True:
                term = zz ** k * mp.rgamma(mp.mpf(alpha) * k + mp.mpf(beta))
                s += term
                if k > 5 and abs(term) < mp.mpf(10) ** (-(need - 5)) * max(abs(s), mp.mpf(1)):
                    return float(s)
                k += 1
    with mp.workdps(40):
        zz = mp.mpf(z)
        total = mp.mpf(0)
        prev = None
        for k in range(1, 400):
            t = -zz ** (-k) * mp.rgamma(mp.mpf(beta) - mp.mpf(alpha) * k)
            if t != 0:
                if prev is not None and abs(t) > prev:
                    break
                prev = abs(t)
            total += t
        if alpha > 1:
            ww = mp.mpf(-z) ** (1 / mp.mpf(alpha)) * mp.exp(1j * mp.pi / alpha)
            total += (2 / mp.mpf(alpha)) * mp.re(ww ** (1 - beta) * mp.exp(ww))
        return float(total)


class TestMittagLeffler:
    def test_exponential_case(self):
        z = np.linspace(-30.0, 5.0, 211)
        rel = np.abs(mittag_leffler(1.0, 1.0, z) - np.exp(z)) / np.exp(z)
        assert rel.max() <= 1e-12

    def test_value_at_zero(self):
        for a, b in [(0.7, 1.3), (0.3, 1.0), (0.5, 0.5), (1.5, 2.0)]:
            assert mittag_leffler(a, b, 0.0) == pytest.approx(1.0 / gamma(b), rel=1e-14)

    def test_half_order_closed_form(self):
        # frozen from the extended-precision oracle: E_(1/2,1)(-1) = e*erfc(1)
        assert ml_eval(MLParams(0.5, 1.0), -1.0) == pytest.approx(0.42758357615580705,
                                                                  rel=1e-12)
        s = np.linspace(0.01, 40.0, 157)
        got = mittag_leffler(0.5, 1.0, -s)
        ref = ml_half_closed_form(-s)
        assert (np.abs(got - ref) / ref).max() <= 1e-10

    def test_alpha_one_beta_two_identity(self):
        for s in [0.3, 4.0, 70.0, 1e5]:
            want = (1.0 - np.exp(-s)) / s
            assert mittag_leffler(1.0, 2.0, -s) == pytest.approx(want, rel=1e-12)

    def test_against_extended_precision_oracle(self):
        cases = [(0.3, 1.0, -10.0), (0.7, 1.3, -20.0), (0.9, 0.9, -100.0),
                 (0.5, 0.5, -30.0), (0.45, 0.2, -40.0), (1.5, 2.0, -300.0),
                 (0.6, 1.6, -3.0), (0.85, 1.0, -0.7)]
        for a, b, z in cases:
            want = mp_series_oracle(a, b, z)
            assert mittag_leffler(a, b, z) == pytest.approx(want, rel=1e-10)

    def test_branch_overlap_band(self):
        # the series and contour branches must agree on the crossover band
        for a in [0.3, 0.5, 0.9, 1.5]:
            zsafe = min(5.0, 14.0 ** a)
            band = np.linspace(0.6 * zsafe, zsafe, 5)
            for b in [1.0, a, a + 1.0]:
                ser = _ml_series(a, b, -band)
                cont = np.array([_ml_neg_integral(a, b, s) for s in band])
                assert np.max(np.abs(ser - cont) / np.abs(cont)) <= 1e-9

    def test_uniform_decay_bound(self):
        # (1+s) |E(-s)| stays finite on s in [0, 1e6] for the four pairs
        s = np.concatenate(([0.0], np.logspace(-3, 6, 120)))
        for a, b in [(0.3, 1.0), (0.5, 0.5), (0.7, 1.3), (0.9, 0.9)]:
            c = ml_uniform_decay_constant(a, b)
            vals = (1.0 + s) * np.abs(mittag_leffler(a, b, -s))
            assert np.isfinite(c)
            assert vals.max() <= c * (1.0 + 1e-12)

    def test_strictly_decreasing_on_negative_axis(self):
        s = np.linspace(0.0, 50.0, 301)
        for a in [0.3, 0.5, 0.8, 1.0]:
            vals = mittag_leffler(a, 1.0, -s)
            assert (np.diff(vals) < 0).all()

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            mittag_leffler(0.0, 1.0, -1.0)
        with pytest.raises(ParameterError):
            mittag_leffler(2.5, 1.0, -1.0)
        with pytest.raises(ParameterError):
            MLParams(-0.5, 1.0)
        with pytest.raises(EvaluationError):
            mittag_leffler(0.5, 1.0, 1e6)   # exp(1e12) overflows


class TestLaplaceResidual:
    def test_classical_case(self):
        assert ml_laplace_residual(1.0, 1.0, 2.0, 50.0) <= 1e-8

    def test_half_order(self):
        assert ml_laplace_residual(0.5, 1.0, 3.0, 200.0) <= 1e-4

    def test_nine_tenths(self):
        assert ml_laplace_residual(0.9, 5.0, 10.0, 100.0) <= 1e-5

    def test_residual_shrinks_with_horizon(self):
        r_short = ml_laplace_residual(0.5, 1.0, 3.0, 5.0)
        r_long = ml_laplace_residual(0.5, 1.0, 3.0, 500.0)
        assert r_long < r_short

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ml_laplace_residual(0.5, 4.0, 1.0, 10.0)   # s <= lam**(1/alpha)
        with pytest.raises(DomainError):
            ml_laplace_residual(0.5, 1.0, 3.0, 0.0)


class TestStableDensity:
    def test_half_closed_form(self):
        # g_1(x; 1/2) = x^(-3/2) exp(-1/(4x)) / (2 sqrt(pi))
        assert stable_density(0.5, 1.0) == pytest.approx(0.21969564473386122, rel=1e-10)
        assert stable_density(0.5, 4.0) == pytest.approx(0.03312544154300357, rel=1e-10)
        x = np.logspace(np.log10(0.05), np.log10(50.0), 60)
        ref = x ** -1.5 * np.exp(-0.25 / x) / (2.0 * np.sqrt(np.pi))
        got = stable_density(0.5, x)
        assert (np.abs(got - ref) / ref).max() <= 1e-8

    @pytest.mark.parametrize("alpha", [0.35, 0.5, 0.7])
    def test_normalization(self, alpha):
        # Zolotarev integral over the bulk; the (heavy) tail via the series
        # representation, which is itself validated against the integral above
        bulk = sum(quad(lambda x: stable_density(alpha, x), lo, hi, limit=200)[0]
                   for lo, hi in [(0.0, 1.0), (1.0, 20.0)])
        tail = quad(lambda x: stable_density_series(alpha, x), 20.0, np.inf,
                    limit=200)[0]
        assert bulk + tail == pytest.approx(1.0, abs=1e-6)

    def test_series_cross_check(self):
        for alpha in [0.3, 0.6]:
            for x in [4.0, 15.0]:
                a = stable_density(alpha, x)
                b = stable_density_series(alpha, x)
                assert a == pytest.approx(b, rel=1e-10)

    def test_tail_constant_bounds_density(self):
        alpha = 0.6
        c1 = stable_tail_constant(alpha)
        x = np.logspace(-1, 3, 40)
        assert (stable_density(alpha, x) <= c1 / (1.0 + x) ** (1.0 + alpha) * (1 + 1e-9)).all()

    def test_scaling_identity(self):
        # g_t(u) computed directly vs manual self-similar scaling of g_1
        alpha, t, u = 0.4, 3.7, 2.3
        lhs = stable_density(alpha, u, t=t)
        rhs = t ** (-1.0 / alpha) * stable_density(alpha, t ** (-1.0 / alpha) * u)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            stable_density(0.5, -1.0)
        with pytest.raises(DomainError):
            stable_density(0.5, 0.0)
        with pytest.raises(ParameterError):
            stable_density(1.2, 1.0)


class TestInverseSubordinatorDensity:
    def test_point_identity_half(self):
        # eta_1(1) = 2 g_1(1) at alpha = 1/2
        want = 2.0 * stable_density(0.5, 1.0)
        assert inverse_subordinator_density(0.5, 1.0, 1.0) == pytest.approx(want, rel=1e-12)

    def test_normalization_and_mean(self):
        alpha, t = 0.5, 1.0
        total = quad(lambda u: inverse_subordinator_density(alpha, t, u), 0, np.inf,
                     limit=200)[0]
        assert total == pytest.approx(1.0, abs=1e-6)
        mean = quad(lambda u: u * inverse_subordinator_density(alpha, t, u), 0, np.inf,
                    limit=200)[0]
        # E[eta_1] = 1/Gamma(1+alpha) = 2/sqrt(pi) at alpha = 1/2
        assert mean == pytest.approx(2.0 / np.sqrt(np.pi), abs=2e-6)

    def test_nonnegative(self):
        u = np.logspace(-3, 2, 50)
        assert (inverse_subordinator_density(0.7, 2.0, u) >= 0).all()

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            inverse_subordinator_density(0.5, 0.0, 1.0)
        with pytest.raises(DomainError):
            inverse_subordinator_density(0.5, 1.0, -1.0)
