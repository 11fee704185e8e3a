import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ascifit.errors import NoConvergence, NonFinite, OutOfDomain, SigmaZero
from ascifit.folded_normal import (
    EvalAccuracy, FoldedParams, folded_mean, folded_mean_dmu, folded_mean_dsigma,
    folded_mean_inverse, folded_square_var, folded_var, inverse_lipschitz, inverse_partials,
    j_sigma, j_sigma_interval_floor, norm_cdf, normal_ratio,
)
from ascifit.oracle import mc_folded_moments

# mpmath at 40 digits, closed forms evaluated independently
F_3_1 = 3.000764308634095447
TWO_PHI_1_MINUS_1 = 0.6826894921370858972
INV_1P1_SIGMA_HALF = 1.094971353227620914
J_1_ETA_02 = 0.006631179015483806133

positive = st.floats(min_value=1e-3, max_value=20, allow_nan=False)
sigmas = st.floats(min_value=0.05, max_value=5)


class TestFoldedMean:
    def test_zero_mean_unit_sigma(self):
        assert folded_mean(0.0, 1.0) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-15)

    def test_sigma_zero_limit(self):
        assert folded_mean(2.0, 0.0) == 2.0
        assert folded_mean(-2.0, 0.0) == 2.0

    def test_high_precision_value(self):
        assert folded_mean(3.0, 1.0) == pytest.approx(F_3_1, abs=1e-14)

    def test_mpmath_agreement_grid(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 30
        for mu in (0.0, 0.1, 1.0, 4.0, 12.0):
            for s in (0.1, 1.0, 3.0):
                m, sg = mpmath.mpf(mu), mpmath.mpf(s)
                exact = sg * mpmath.sqrt(2 / mpmath.pi) * mpmath.exp(-m**2 / (2 * sg**2)) \
                    - m * (1 - 2 * mpmath.ncdf(m / sg))
                assert folded_mean(mu, s) == pytest.approx(float(exact), rel=1e-13, abs=1e-15)

    def test_vectorized(self):
        out = folded_mean(np.array([0.0, 3.0]), 1.0)
        assert isinstance(out, np.ndarray)
        assert out[1] == pytest.approx(F_3_1, abs=1e-14)

    def test_nonfinite(self):
        with pytest.raises(NonFinite):
            folded_mean(float("nan"), 1.0)
        with pytest.raises(NonFinite):
            folded_mean(1.0, float("inf"))

    @given(mu=st.floats(0, 20), sigma=st.floats(0, 5))
    def test_bounds(self, mu, sigma):
        f = folded_mean(mu, sigma)
        assert f >= max(0.0, mu) - 1e-12
        assert f * f <= mu * mu + sigma * sigma + 1e-10

    @given(a=positive, b=positive, sigma=sigmas)
    def test_monotone_and_lipschitz(self, a, b, sigma):
        lo, hi = sorted((a, b))
        f_lo, f_hi = folded_mean(lo, sigma), folded_mean(hi, sigma)
        assert f_lo <= f_hi
        assert f_hi - f_lo <= hi - lo + 1e-12

    def test_strict_monotone_grid(self):
        mu = np.linspace(1e-3, 10, 2001)
        for sigma in (0.1, 1.0, 5.0):
            assert np.all(np.diff(folded_mean(mu, sigma)) > 0)


class TestFoldedVariance:
    def test_zero_mean(self):
        assert folded_var(0.0, 1.0) == pytest.approx(1 - 2 / math.pi, abs=1e-15)

    def test_far_from_fold(self):
        assert folded_var(10.0, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_degenerate(self):
        assert folded_var(1.0, 0.0) == 0.0

    @given(mu=st.floats(1e-6, 50), sigma=st.floats(1e-3, 5))
    def test_bounds(self, mu, sigma):
        g = folded_var(mu, sigma)
        assert 0.0 <= g <= sigma**2
        assert g >= sigma**2 * (1 - 2 / math.pi) * (1 - 1e-12)

    def test_no_cancellation_far_out(self):
        # mu/sigma = 1e4: the naive mu^2 + sigma^2 - f^2 loses every digit
        assert folded_var(1e4, 1.0) == pytest.approx(1.0, rel=1e-12)


class TestSquareVariance:
    @pytest.mark.parametrize("mu,sigma,expected", [(0, 1, 2.0), (1, 1, 6.0), (5, 0, 0.0)])
    def test_values(self, mu, sigma, expected):
        assert folded_square_var(mu, sigma) == expected

    def test_params_wrapper(self):
        p = FoldedParams(1.0, 1.0)
        assert p.square_var() == 6.0
        assert p.mean() == folded_mean(1.0, 1.0)
        with pytest.raises(OutOfDomain):
            FoldedParams(1.0, -1.0)


class TestDerivatives:
    def test_values(self):
        assert folded_mean_dmu(0.0, 1.0) == 0.0
        assert folded_mean_dmu(1.0, 1.0) == pytest.approx(TWO_PHI_1_MINUS_1, abs=1e-15)

    def test_sigma_zero(self):
        with pytest.raises(SigmaZero):
            folded_mean_dmu(1.0, 0.0)

    def test_finite_difference(self):
        h = 1e-5
        for mu in np.linspace(0.0, 6.0, 61):
            for sigma in (0.2, 1.0, 3.0):
                fd = (folded_mean(mu + h, sigma) - folded_mean(mu - h, sigma)) / (2 * h)
                assert abs(fd - folded_mean_dmu(mu, sigma)) <= 1e-6

    def test_sigma_partial_finite_difference(self):
        h = 1e-5
        for mu in (0.2, 1.0, 3.0):
            for sigma in (0.3, 1.0, 2.0):
                fd = (folded_mean(mu, sigma + h) - folded_mean(mu, sigma - h)) / (2 * h)
                assert abs(fd - folded_mean_dsigma(mu, sigma)) <= 1e-6

    def test_inverse_partials_match_finite_differences(self):
        eta, h = 0.2, 1e-5
        mu, sigma = 0.9, 0.7
        u = folded_mean(mu, sigma)
        d_u, d_sigma = inverse_partials(mu, sigma)
        fd_u = (folded_mean_inverse(u + h, sigma, eta) - folded_mean_inverse(u - h, sigma, eta)) / (2 * h)
        fd_s = (folded_mean_inverse(u, sigma + h, eta) - folded_mean_inverse(u, sigma - h, eta)) / (2 * h)
        assert d_u == pytest.approx(fd_u, abs=1e-5)
        assert d_sigma == pytest.approx(fd_s, abs=1e-5)
        assert d_u <= inverse_lipschitz(sigma, eta)


class TestInverse:
    def test_roundtrip_points(self):
        assert folded_mean_inverse(folded_mean(2.0, 1.0), 1.0, 0.2) == pytest.approx(2.0, abs=1e-9)
        assert folded_mean_inverse(folded_mean(0.2, 1.0), 1.0, 0.2) == pytest.approx(0.2, abs=1e-9)

    def test_against_dense_scan(self):
        grid = np.arange(0.2, 1.1 + 5e-7, 1e-6)
        scan = grid[np.argmin(np.abs(folded_mean(grid, 0.5) - 1.1))]
        got = folded_mean_inverse(1.1, 0.5, 0.2)
        assert abs(got - scan) <= 1e-6
        assert got == pytest.approx(INV_1P1_SIGMA_HALF, abs=1e-9)

    def test_sigma_zero_identity(self):
        assert folded_mean_inverse(1.7, 0.0, 0.2) == 1.7
        with pytest.raises(OutOfDomain):
            folded_mean_inverse(0.1, 0.0, 0.2)

    def test_below_floor(self):
        with pytest.raises(OutOfDomain):
            folded_mean_inverse(0.5, 1.0, 0.2)  # f(0.2, 1) ~ 0.81

    def test_max_iters(self):
        with pytest.raises(NoConvergence):
            folded_mean_inverse(3.0, 1.0, 0.2, EvalAccuracy(max_iters=3))

    def test_vector_input(self):
        mu = np.array([0.2, 0.5, 4.0])
        back = folded_mean_inverse(folded_mean(mu, 0.8), 0.8, 0.2)
        np.testing.assert_allclose(back, mu, atol=1e-9)

    @given(mu=st.floats(0.2, 10.2), sigma=st.floats(0.1, 5))
    def test_roundtrip_property(self, mu, sigma):
        acc = EvalAccuracy()
        back = folded_mean_inverse(folded_mean(mu, sigma), sigma, 0.2, acc)
        assert 0.2 <= back
        # f^{-1} is 1/(2 Phi(eta/sigma) - 1)-Lipschitz, the residual is <= tol/2
        bound = 10 * acc.inverse_rel_tol * max(1.0, mu) * inverse_lipschitz(sigma, 0.2)
        assert abs(back - mu) <= bound
        assert abs(folded_mean(back, sigma) - folded_mean(mu, sigma)) <= acc.inverse_rel_tol * max(1, mu)


class TestJSigma:
    def test_zero(self):
        assert j_sigma(0.0, 0.2) == 0.0

    def test_value(self):
        j = j_sigma(1.0, 0.2)
        assert 0 < j < 0.5
        assert j == pytest.approx(J_1_ETA_02, rel=1e-12)

    def test_positive_on_grid(self):
        s = np.linspace(1e-3, 50, 5000)
        assert np.all(j_sigma(s, 0.2) > 0)

    @pytest.mark.parametrize("s1,s2", [(0.1, 0.5), (0.5, 2.0), (1.0, 5.0)])
    def test_interval_floor(self, s1, s2):
        grid = np.linspace(s1, s2, 2001)
        floor = j_sigma_interval_floor(s1, s2, 0.2)
        assert floor > 0
        assert np.min(j_sigma(grid, 0.2)) >= floor


class TestNormalRatio:
    def test_at_zero(self):
        assert normal_ratio(0.0) == 0.5

    def test_bounded_and_decreasing(self):
        x = np.linspace(1e-6, 10, 100_001)
        m = normal_ratio(x)
        assert np.all(m < 0.5)
        assert np.all(np.diff(m) < 0)

    def test_series_matches_direct_near_cutoff(self):
        x = 1.0001e-4
        direct = x * math.exp(-x * x / 2) / math.sqrt(2 * math.pi) / math.erf(x / math.sqrt(2))
        assert normal_ratio(9.999e-5) == pytest.approx(direct, abs=1e-12)

    def test_cdf_tail(self):
        assert norm_cdf(-10.0) == pytest.approx(7.61985302416047e-24, rel=1e-12)


@pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (1.0, 1.0), (5.0, 0.1)])
def test_monte_carlo_moments(mu, sigma):
    mc = mc_folded_moments(FoldedParams(mu, sigma), draws=1_000_000, seed=99)
    assert abs(mc.mean - folded_mean(mu, sigma)) <= 4 * mc.se_mean
    assert abs(mc.var - folded_var(mu, sigma)) <= 4 * mc.se_var
    assert abs(mc.square_var - folded_square_var(mu, sigma)) <= 4 * mc.se_square_var
