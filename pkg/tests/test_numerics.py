"""Special functions, quadrature, and root finding against independent
oracles: defining series, external library implementations, empirical
distributions, and adaptive quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from zfshort.numerics import (
    BracketError,
    Tolerance,
    adaptive_simpson,
    bessel_i0,
    bessel_i0_scaled,
    bisect_root,
    gauss_gamma_nodes,
    gauss_laguerre_nodes,
    gaussian_q,
    kummer_1f1_int,
    kummer_1f1_int_scaled,
    lower_incomplete_gamma_regularized,
    marcum_q1,
    marcum_q1_complement,
    pochhammer,
    upper_incomplete_gamma_regularized,
)


class TestTolerance:
    def test_defaults(self):
        tol = Tolerance()
        assert tol.abs_tol == 1e-12
        assert tol.rel_tol == 1e-10
        assert tol.max_terms == 10_000

    @pytest.mark.parametrize(
        "kwargs", [{"abs_tol": 0.0}, {"rel_tol": -1e-3}, {"max_terms": 0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Tolerance(**kwargs)


class TestGaussianQ:
    def test_symmetry_point(self):
        assert gaussian_q(0.0) == 0.5

    def test_deep_tail_no_underflow_to_nan(self):
        # Q(40) ~ 1.5e-350 sits below the denormal floor: graceful underflow
        v = gaussian_q(40.0)
        assert 0.0 <= v < 1e-300
        assert math.isfinite(v)
        # within the representable range the tail stays strictly positive
        assert gaussian_q(37.0) > 0.0

    def test_against_quadrature_oracle(self):
        # independent route: adaptive quadrature of the normal density
        oracle, err = integrate.quad(
            lambda t: math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi), 1.0, 40.0
        )
        assert err < 1e-10
        assert gaussian_q(1.0) == pytest.approx(oracle, abs=1e-12)
        assert gaussian_q(1.0) == pytest.approx(0.158655253931457, abs=1e-12)

    @given(st.floats(min_value=-8.0, max_value=8.0))
    @settings(max_examples=200, deadline=None)
    def test_complement_symmetry(self, x):
        assert gaussian_q(x) + gaussian_q(-x) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            gaussian_q(bad)


class TestMarcumQ1:
    def test_b_zero(self):
        for a in (0.0, 0.5, 3.0, 40.0):
            assert marcum_q1(a, 0.0) == 1.0
            assert marcum_q1_complement(a, 0.0) == 0.0

    def test_a_zero_rayleigh_tail(self):
        for b in (0.1, 1.0, 3.0):
            assert marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), rel=1e-14)

    def test_against_empirical_survival(self):
        # survival of |N(1,1)|^2 + |N(0,1)|^2 at 4 estimated from 1e7 draws
        rng = np.random.default_rng(20240817)
        n = 10**7
        draws = (rng.standard_normal(n) + 1.0) ** 2 + rng.standard_normal(n) ** 2
        emp = float(np.mean(draws > 4.0))
        se = math.sqrt(emp * (1 - emp) / n)
        assert abs(marcum_q1(1.0, 2.0) - emp) < 4.0 * se

    def test_against_noncentral_chi2(self):
        # scipy's noncentral chi-squared is an independent implementation
        for a in (0.3, 1.0, 2.5, 7.0, 12.0):
            for b in (0.2, 1.0, 2.0, 5.0, 9.0):
                ref = stats.ncx2.sf(b * b, 2, a * a)
                assert marcum_q1(a, b) == pytest.approx(ref, rel=1e-8, abs=1e-13)

    def test_complement_relative_accuracy_small_outage(self):
        # deep left tail where 1 - Q1 is tiny: positive-series route keeps
        # relative accuracy that a plain 1 - q subtraction cannot
        val = marcum_q1_complement(15.0, 2.0)
        ref = stats.ncx2.cdf(4.0, 2, 225.0)
        assert val == pytest.approx(ref, rel=1e-2)
        assert val < 1e-30

    def test_sides_sum_to_one(self):
        for a in (0.0, 0.7, 3.0, 9.0):
            for b in (0.1, 1.0, 4.0, 8.0):
                s = marcum_q1(a, b) + marcum_q1_complement(a, b)
                assert s == pytest.approx(1.0, abs=1e-13)

    def test_monotonicity_grid(self):
        grid = np.linspace(0.0, 10.0, 21)
        for a in grid:
            vals = [marcum_q1(a, b) for b in grid]
            assert all(x >= y - 1e-13 for x, y in zip(vals, vals[1:]))
        for b in grid:
            vals = [marcum_q1(a, b) for a in grid]
            assert all(y >= x - 1e-13 for x, y in zip(vals, vals[1:]))

    def test_empirical_survival_invariant_1e6(self):
        rng = np.random.default_rng(7)
        n = 10**6
        a, b = 2.0, 1.5
        draws = (rng.standard_normal(n) + a) ** 2 + rng.standard_normal(n) ** 2
        emp = float(np.mean(draws > b * b))
        se = math.sqrt(emp * (1 - emp) / n)
        assert abs(marcum_q1(a, b) - emp) <= 4.0 * se

    def test_domain(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)
        with pytest.raises(ValueError):
            marcum_q1(1.0, -0.1)
        with pytest.raises(ValueError):
            marcum_q1_complement(math.nan, 1.0)

    def test_clamped_range(self):
        for a, b in [(25.0, 1e-3), (1e-3, 25.0), (30.0, 30.0)]:
            v = marcum_q1(a, b)
            assert 0.0 <= v <= 1.0


def _i0_series(x: float) -> float:
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= (x / 2.0) ** 2 / (k * k)
        total += term
        if term < 1e-18 * total:
            return total


class TestBesselI0:
    def test_at_zero(self):
        assert bessel_i0(0.0) == 1.0
        assert bessel_i0_scaled(0.0) == 1.0

    def test_power_series_oracle(self):
        for x in (0.1, 1.0, 5.0, 20.0, 100.0):
            assert bessel_i0(x) == pytest.approx(_i0_series(x), rel=1e-13)
        assert bessel_i0(1.0) == pytest.approx(1.2660658777520082, rel=1e-13)

    def test_large_argument_via_scaled_form(self):
        v = bessel_i0(100.0)
        assert math.isfinite(v) and v > 1e40
        assert bessel_i0_scaled(100.0) == pytest.approx(v * math.exp(-100.0), rel=1e-12)
        assert bessel_i0_scaled(5000.0) < 1.0  # no overflow far beyond exp range

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            bessel_i0(710.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            bessel_i0(-1.0)
        with pytest.raises(ValueError):
            bessel_i0_scaled(-0.5)


class TestIncompleteGamma:
    def test_shape_one_is_exp(self):
        for x in (0.0, 0.5, 3.0, 20.0):
            assert upper_incomplete_gamma_regularized(1, x) == pytest.approx(
                math.exp(-x), rel=1e-14
            )

    def test_empty_tail(self):
        for s in (1, 3, 40):
            assert upper_incomplete_gamma_regularized(s, 0.0) == 1.0
            assert lower_incomplete_gamma_regularized(s, 0.0) == 0.0

    def test_hand_checked_value(self):
        # e^-2 (1 + 2 + 2) by the finite-sum identity
        assert upper_incomplete_gamma_regularized(3, 2.0) == pytest.approx(
            5.0 * math.exp(-2.0), rel=1e-14
        )

    def test_complementarity(self):
        for s in (1, 2, 7, 127):
            for x in (0.01, 1.0, 10.0, 200.0):
                u = upper_incomplete_gamma_regularized(s, x)
                l = lower_incomplete_gamma_regularized(s, x)
                assert u + l == pytest.approx(1.0, abs=1e-12)

    def test_against_scipy(self):
        from scipy.special import gammainc, gammaincc

        for s in (1, 4, 33, 127):
            for x in (0.05, 2.0, 50.0, 700.0):
                assert upper_incomplete_gamma_regularized(s, x) == pytest.approx(
                    float(gammaincc(s, x)), rel=1e-10, abs=1e-300
                )
                assert lower_incomplete_gamma_regularized(s, x) == pytest.approx(
                    float(gammainc(s, x)), rel=1e-10, abs=1e-300
                )

    def test_lower_deep_tail_relative_accuracy(self):
        from scipy.special import gammainc

        v = lower_incomplete_gamma_regularized(30, 2.0)
        assert v == pytest.approx(float(gammainc(30, 2.0)), rel=1e-10)
        assert v < 1e-20

    def test_domain(self):
        with pytest.raises(ValueError):
            upper_incomplete_gamma_regularized(0, 1.0)
        with pytest.raises(ValueError):
            upper_incomplete_gamma_regularized(2, -1.0)
        with pytest.raises(ValueError):
            lower_incomplete_gamma_regularized(-3, 1.0)


def _kummer_series_oracle(a: int, b: int, x: float, rel=1e-14) -> float:
    term = 1.0
    total = 1.0
    k = 0
    while True:
        term *= (a + k) / (b + k) * x / (k + 1)
        total += term
        k += 1
        if abs(term) <= rel * abs(total):
            return total


class TestKummer:
    def test_classical_closed_form(self):
        assert kummer_1f1_int(1, 2, 0.0) == pytest.approx(1.0, abs=1e-14)
        for x in (0.2, 1.0, 4.0):
            assert kummer_1f1_int(1, 2, x) == pytest.approx(
                math.expm1(x) / x, rel=1e-12
            )

    def test_equal_parameters_exponential(self):
        for x in (0.0, 0.5, 3.0, 10.0):
            assert kummer_1f1_int(2, 2, x) == pytest.approx(math.exp(x), rel=1e-13)

    def test_direct_series_oracle(self):
        assert kummer_1f1_int(3, 2, 0.5) == pytest.approx(
            _kummer_series_oracle(3, 2, 0.5), rel=1e-12
        )
        for a in (2, 5, 17):
            for x in (0.1, 1.0, 8.0):
                assert kummer_1f1_int(a, 2, x) == pytest.approx(
                    _kummer_series_oracle(a, 2, x), rel=1e-11
                )

    def test_transform_vs_series_bridge(self):
        # the scaled (terminating-polynomial) route must agree with the
        # defining series times exp(-x): this is the scalar-level bridge
        # between the two closed forms of the outage CDF
        for l in (1, 2, 4, 16, 64):
            for x in (0.1, 1.0, 10.0):
                scaled = kummer_1f1_int_scaled(l + 1, 2, x)
                series = kummer_1f1_int(l + 1, 2, x, method="series")
                assert scaled == pytest.approx(series * math.exp(-x), rel=1e-10)

    def test_scaled_polynomial_form(self):
        # explicit finite polynomial with pochhammer coefficients
        for l in (1, 3, 8):
            for x in (0.3, 2.0):
                poly = sum(
                    pochhammer(1 - l, k) * (-x) ** k
                    / (math.factorial(k) * pochhammer(2, k))
                    for k in range(l)
                )
                assert kummer_1f1_int_scaled(l + 1, 2, x) == pytest.approx(
                    poly, rel=1e-12
                )

    @given(
        st.integers(min_value=1, max_value=24),
        st.floats(min_value=0.0, max_value=10.0),
    )
    @settings(max_examples=120, deadline=None)
    def test_lower_bound_inequality(self, a, x):
        assert kummer_1f1_int(a, 2, x) >= 1.0 + a * x / 2.0 - 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            kummer_1f1_int(0, 2, 1.0)
        with pytest.raises(ValueError):
            kummer_1f1_int(2, 0, 1.0)
        with pytest.raises(ValueError):
            kummer_1f1_int(2, 2, 1.0, method="nope")
        with pytest.raises(ValueError):
            kummer_1f1_int_scaled(1, 2, 1.0)


class TestPochhammer:
    def test_empty_product(self):
        assert pochhammer(3.7, 0) == 1.0
        assert pochhammer(-5.0, 0) == 1.0

    def test_negative_integer_termination(self):
        for l in (1, 2, 5, 30):
            for k in range(l, l + 4):
                assert pochhammer(1 - l, k) == 0.0

    def test_direct_multiplication(self):
        assert pochhammer(3, 4) == 360.0
        assert pochhammer(1, 5) == math.factorial(5)

    def test_domain(self):
        with pytest.raises(ValueError):
            pochhammer(1.0, -1)


class TestGaussLaguerre:
    def test_two_point_rule(self):
        rule = gauss_laguerre_nodes(2)
        nodes = sorted(t for t, _ in rule)
        assert nodes[0] == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-12)
        assert nodes[1] == pytest.approx(2.0 + math.sqrt(2.0), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 8, 64, 256])
    def test_weight_normalization_and_first_moment(self, n):
        rule = gauss_laguerre_nodes(n)
        assert sum(w for _, w in rule) == pytest.approx(1.0, abs=1e-12)
        assert sum(w * t for t, w in rule) == pytest.approx(1.0, abs=1e-10)

    def test_third_moment(self):
        rule = gauss_laguerre_nodes(64)
        assert sum(w * t**3 for t, w in rule) == pytest.approx(6.0, abs=1e-9)

    @pytest.mark.parametrize("n", [1, 0, 257])
    def test_domain(self, n):
        with pytest.raises(ValueError):
            gauss_laguerre_nodes(n)

    def test_gamma_rule_moments(self):
        for shape in (1.0, 3.0, 33.0, 127.0):
            t, w = gauss_gamma_nodes(64, shape)
            assert float(w.sum()) == pytest.approx(1.0, abs=1e-12)
            assert float((w * t).sum()) == pytest.approx(shape, rel=1e-12)
            var = float((w * t * t).sum()) - shape * shape
            assert var == pytest.approx(shape, rel=1e-9)

    def test_gamma_rule_shape_one_is_laguerre(self):
        t, w = gauss_gamma_nodes(8, 1.0)
        ref = gauss_laguerre_nodes(8)
        for (tt, ww), (rt, rw) in zip(zip(t, w), ref):
            assert tt == pytest.approx(rt, rel=1e-12)
            assert ww == pytest.approx(rw, rel=1e-10)


class TestBisectRoot:
    def test_linear(self):
        assert bisect_root(lambda x: x - 1.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-10)

    def test_sqrt2(self):
        root = bisect_root(lambda x: x * x - 2.0, 0.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            bisect_root(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_endpoints(self):
        assert bisect_root(lambda x: x, 0.0, 1.0) == 0.0


class TestAdaptiveSimpson:
    def test_sine(self):
        assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(
            2.0, abs=1e-10
        )

    def test_polynomial_exact(self):
        v = adaptive_simpson(lambda x: 3 * x * x, 0.0, 2.0, 1e-14)
        assert v == pytest.approx(8.0, abs=1e-12)

    def test_empty_interval(self):
        assert adaptive_simpson(math.exp, 1.0, 1.0, 1e-12) == 0.0

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            adaptive_simpson(math.exp, 1.0, 0.0, 1e-12)
