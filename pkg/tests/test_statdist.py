import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distmean.errors import InvalidArgumentError
from distmean.statdist import (
    FParams,
    f_cdf,
    f_quantile,
    f_sf,
    normal_cdf,
    normal_quantile,
    reg_inc_beta,
)


def erf_series(x, digits=40):
    """Maclaurin series for erf in extended precision."""
    with mpmath.workdps(digits):
        x = mpmath.mpf(x)
        term_sum, n = mpmath.mpf(0), 0
        while True:
            term = (-1) ** n * x ** (2 * n + 1) / (mpmath.factorial(n) * (2 * n + 1))
            term_sum += term
            if abs(term) < mpmath.mpf(10) ** (-digits):
                break
            n += 1
        return float(2 / mpmath.sqrt(mpmath.pi) * term_sum)


def t2_cdf(t):
    return 0.5 + t / (2.0 * math.sqrt(2.0 + t * t))


def bisect(f, target, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestNormal:
    def test_center(self):
        assert normal_cdf(0.0) == 0.5

    def test_against_series_oracle(self):
        expected = 0.5 * (1.0 + erf_series(1.959964 / math.sqrt(2.0)))
        assert normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        assert normal_cdf(1.959964) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("x", [-3.1, -1.3, -0.2, 0.4, 2.5])
    def test_series_agreement_grid(self, x):
        assert normal_cdf(x) == pytest.approx(0.5 * (1.0 + erf_series(x / math.sqrt(2.0))), abs=1e-15)

    def test_symmetry_grid(self):
        xs = np.linspace(-8.0, 8.0, 1601)
        vals = [normal_cdf(x) for x in xs]
        assert all(abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-14 for x in xs)
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert normal_cdf(-1.3) == pytest.approx(1.0 - normal_cdf(1.3), abs=1e-15)

    def test_quantile_values(self):
        assert normal_quantile(0.5) == 0.0
        oracle = bisect(normal_cdf, 0.975, 0.0, 5.0)
        assert normal_quantile(0.975) == pytest.approx(1.96, abs=1e-4)
        assert normal_quantile(0.975) == pytest.approx(oracle, abs=1e-12)
        assert normal_quantile(normal_cdf(0.7)) == pytest.approx(0.7, abs=1e-10)

    @given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
    def test_quantile_roundtrip(self, q):
        assert abs(normal_cdf(normal_quantile(q)) - q) <= 1e-10

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_cdf_rejects_nonfinite(self, bad):
        with pytest.raises(InvalidArgumentError):
            normal_cdf(bad)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_domain(self, bad):
        with pytest.raises(InvalidArgumentError):
            normal_quantile(bad)


class TestIncompleteBeta:
    def test_uniform_case(self):
        assert reg_inc_beta(1, 1, 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_symmetric_case(self):
        assert reg_inc_beta(2, 2, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_reflection(self):
        assert reg_inc_beta(3, 5, 0.2) == pytest.approx(1.0 - reg_inc_beta(5, 3, 0.8), abs=1e-15)

    def test_endpoints(self):
        assert reg_inc_beta(2.5, 4.0, 0.0) == 0.0
        assert reg_inc_beta(2.5, 4.0, 1.0) == 1.0

    @settings(max_examples=200)
    @given(
        st.floats(min_value=0.05, max_value=500),
        st.floats(min_value=0.05, max_value=500),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_matches_quadrature(self, a, b, x):
        with mpmath.workdps(30):
            expected = float(mpmath.betainc(a, b, 0, x, regularized=True))
        assert reg_inc_beta(a, b, x) == pytest.approx(expected, abs=1e-11)

    def test_monotone_in_x(self):
        xs = np.linspace(0, 1, 201)
        vals = [reg_inc_beta(3.5, 7.25, x) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("args", [(0, 1, 0.5), (1, -1, 0.5), (1, 1, -0.1), (1, 1, 1.1)])
    def test_domain(self, args):
        with pytest.raises(InvalidArgumentError):
            reg_inc_beta(*args)


class TestF:
    def test_median_of_equal_df(self):
        assert f_cdf(1.0, FParams(3, 3)) == pytest.approx(0.5, abs=1e-14)

    def test_t2_identity(self):
        # F(1, 2) = t(2)^2, so P(F <= 3) = 2 T(sqrt 3) - 1
        expected = 2.0 * t2_cdf(math.sqrt(3.0)) - 1.0
        assert f_cdf(3.0, FParams(1, 2)) == pytest.approx(expected, abs=1e-12)
        assert f_cdf(3.0, FParams(1, 2)) == pytest.approx(0.774597, abs=1e-4)

    def test_support_boundary(self):
        assert f_cdf(0.0, FParams(4, 7)) == 0.0
        with pytest.raises(InvalidArgumentError):
            f_cdf(-1.0, FParams(4, 7))

    def test_sf_complements_cdf(self):
        fp = FParams(5, 20)
        for x in (0.1, 1.0, 2.5, 9.0):
            assert f_sf(x, fp) + f_cdf(x, fp) == pytest.approx(1.0, abs=1e-14)

    def test_quantile_median(self):
        assert f_quantile(0.5, FParams(4, 4)) == pytest.approx(1.0, abs=1e-8)

    def test_quantile_t2_oracle(self):
        t975 = bisect(t2_cdf, 0.975, 0.0, 100.0)
        assert f_quantile(0.95, FParams(1, 2)) == pytest.approx(t975**2, abs=1e-8)
        assert f_quantile(0.95, FParams(1, 2)) == pytest.approx(18.513, abs=1e-2)

    def test_quantile_roundtrip_x(self):
        fp = FParams(5, 20)
        assert f_quantile(f_cdf(2.5, fp), fp) == pytest.approx(2.5, abs=1e-8)

    @pytest.mark.parametrize("d1,d2", [(1, 1), (1, 2), (5, 20), (50, 4950), (3, 10_000), (10_000, 10_000), (10_000, 7)])
    def test_quantile_roundtrip_grid(self, d1, d2):
        fp = FParams(d1, d2)
        for q in np.round(np.arange(0.01, 1.0, 0.01), 2):
            assert abs(f_cdf(f_quantile(q, fp), fp) - q) <= 1e-10

    def test_large_denominator_limit(self):
        assert f_quantile(0.95, FParams(1, 10**7)) == pytest.approx(normal_quantile(0.975) ** 2, abs=1e-3)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.5])
    def test_quantile_domain(self, q):
        with pytest.raises(InvalidArgumentError):
            f_quantile(q, FParams(2, 3))

    @pytest.mark.parametrize("d1,d2", [(0, 3), (3, 0), (1.5, 3)])
    def test_fparams_validation(self, d1, d2):
        with pytest.raises(InvalidArgumentError):
            FParams(d1, d2)
