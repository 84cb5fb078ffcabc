import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelevels import moments
from treelevels.moments import LogValue


# --- exact rational reference path (tests only), valid for rational t -----

def variance_series_exact(k: int, t: Fraction, i_max: int) -> Fraction:
    total = Fraction(0)
    for i in range(i_max + 1):
        total += (
            t ** (k + i)
            * math.factorial(2 * i)
            / (Fraction(math.factorial(i)) ** 2 * math.factorial(k + i))
        )
    return total


def count_variance_exact(k: int, t: Fraction) -> Fraction:
    return variance_series_exact(k, t, k - 1)


def expected_count_exact(k: int, t: Fraction) -> Fraction:
    return t**k / Fraction(math.factorial(k))


class TestLogValue:
    def test_zero_round_trip(self):
        assert LogValue.from_float(0.0).to_float() == 0.0
        assert LogValue.zero().sign == 0

    @settings(max_examples=200)
    @given(st.floats(min_value=-1e250, max_value=1e250,
                     allow_nan=False, allow_infinity=False))
    def test_round_trip(self, x):
        back = LogValue.from_float(x).to_float()
        if x == 0.0:
            assert back == 0.0
        else:
            assert math.isclose(back, x, rel_tol=1e-13)

    @settings(max_examples=200)
    @given(
        st.floats(min_value=1e-100, max_value=1e100, allow_nan=False),
        st.floats(min_value=1e-100, max_value=1e100, allow_nan=False),
    )
    def test_arithmetic_matches_floats(self, a, b):
        la, lb = LogValue.from_float(a), LogValue.from_float(b)
        assert math.isclose((la * lb).to_float(), a * b, rel_tol=1e-12)
        assert math.isclose((la / lb).to_float(), a / b, rel_tol=1e-12)
        assert math.isclose((la + lb).to_float(), a + b, rel_tol=1e-12)
        diff = (la - lb).to_float()
        if a != b:
            assert math.isclose(diff, a - b, rel_tol=1e-9, abs_tol=1e-290)

    def test_subtract_equal_is_exact_zero(self):
        v = LogValue.from_float(3.7)
        assert (v - v).sign == 0

    def test_invalid_sign_rejected(self):
        with pytest.raises(ValueError):
            LogValue(2, 0.0)


class TestExpectedCount:
    def test_linear_at_generation_one(self):
        assert math.isclose(moments.expected_count(1, 5.0).to_float(), 5.0)

    def test_direct_value(self):
        assert math.isclose(moments.expected_count(2, 3.0).to_float(), 4.5)

    def test_zero_time(self):
        assert moments.expected_count(7, 0.0).to_float() == 0.0

    @pytest.mark.parametrize("k", [1, 2, 5, 10, 20])
    @pytest.mark.parametrize("t", [Fraction(1, 2), Fraction(3), Fraction(17, 4)])
    def test_against_rational_reference(self, k, t):
        got = moments.expected_count(k, float(t)).to_float()
        want = float(expected_count_exact(k, t))
        assert math.isclose(got, want, rel_tol=1e-12)

    def test_large_k_does_not_overflow(self):
        v = moments.expected_count(400, 50.0)
        assert v.sign == 1 and math.isfinite(v.log_abs)


class TestCountVariance:
    def test_boundary_generation_one(self):
        # variance of a unit-rate Poisson count is t
        assert math.isclose(moments.count_variance(1, 2.0).to_float(), 2.0)

    def test_known_value(self):
        assert math.isclose(moments.count_variance(2, 1.0).to_float(), 5.0 / 6.0)

    @pytest.mark.parametrize("k", [1, 2, 3, 7, 12, 20])
    @pytest.mark.parametrize("t", [Fraction(1, 3), Fraction(2), Fraction(25, 2)])
    def test_against_rational_reference(self, k, t):
        got = moments.count_variance(k, float(t)).to_float()
        want = float(count_variance_exact(k, t))
        assert math.isclose(got, want, rel_tol=1e-12)

    @pytest.mark.parametrize(
        "fn,k",
        [
            (moments.expected_count, 1),
            (moments.expected_count, 8),
            (moments.count_variance, 1),
            (moments.count_variance, 3),
            (moments.count_variance, 8),
            (moments.fluctuation_second_moment, 2),
            (moments.fluctuation_second_moment, 8),
        ],
    )
    def test_monotone_in_time(self, fn, k):
        ts = np.linspace(0.0, 30.0, 40)
        vals = [fn(k, float(t)).to_float() for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestFluctuationSecondMoment:
    def test_equals_integral_of_previous_variance(self):
        # fluctuation moment at k is the running integral of variance at k-1
        for k, t in [(2, 2.0), (3, 1.0), (5, 4.0)]:
            quad = moments.adaptive_simpson(
                lambda y, kk=k: moments.count_variance(kk - 1, y).to_float(),
                0.0,
                t,
                tol=1e-12,
            )
            got = moments.fluctuation_second_moment(k, t).to_float()
            assert math.isclose(got, quad, rel_tol=1e-8)

    def test_known_values(self):
        assert math.isclose(moments.fluctuation_second_moment(2, 2.0).to_float(), 2.0)
        assert math.isclose(moments.fluctuation_second_moment(3, 1.0).to_float(), 0.25)

    def test_zero_time(self):
        assert moments.fluctuation_second_moment(4, 0.0).to_float() == 0.0

    def test_bounded_by_count_variance(self):
        for k in (2, 3, 10, 50):
            for t in (0.1, 1.0, 10.0, 500.0):
                assert (
                    moments.fluctuation_second_moment(k, t).log_abs
                    <= moments.count_variance(k, t).log_abs
                )

    def test_requires_k_at_least_two(self):
        with pytest.raises(ValueError):
            moments.fluctuation_second_moment(1, 1.0)


class TestFluctuationLeadingTerm:
    def test_arithmetic_value(self):
        assert math.isclose(moments.fluctuation_leading_term(2, 10.0).to_float(), 25.0)

    def test_ratio_approaches_one_with_time(self):
        k = 15
        gaps = []
        for t in (1e3, 1e5):
            ratio = (
                moments.fluctuation_second_moment(k, t)
                / moments.fluctuation_leading_term(k, t)
            ).to_float()
            gaps.append(abs(ratio - 1.0))
        assert gaps[1] < gaps[0]

    def test_top_term_coefficient_ratio_tends_to_one(self):
        # ratio of the exact top series term to the leading form is
        # 2(k-1)/(2k-3), dropping to 1 as k grows; checked at t = k**2
        prev = None
        for k in (5, 10, 20, 50, 100):
            t = float(k * k)
            log_top = (
                (2 * k - 2) * math.log(t)
                - 2 * math.lgamma(k - 1)
                + math.lgamma(2 * k - 3)
                - math.lgamma(2 * k - 1)
            )
            ratio = math.exp(
                log_top - moments.fluctuation_leading_term(k, t).log_abs
            )
            assert math.isclose(ratio, 2 * (k - 1) / (2 * k - 3), rel_tol=1e-10)
            if prev is not None:
                assert abs(ratio - 1.0) < abs(prev - 1.0)
            prev = ratio
        assert abs(prev - 1.0) < 0.006


class TestTailCoefficient:
    def test_known_values(self):
        assert math.isclose(moments.tail_coefficient(1, 4).to_float(), 0.6, rel_tol=1e-12)
        assert math.isclose(moments.tail_coefficient(1, 5).to_float(), 1.6, rel_tol=1e-12)

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            moments.tail_coefficient(0, 5)
        with pytest.raises(ValueError):
            moments.tail_coefficient(3, 5)

    def test_stirling_bound_holds_everywhere(self):
        worst = min(
            moments.stirling_bound_margin(i, k)
            for k in range(4, 201)
            for i in range(1, k - 2)
        )
        assert worst >= 0.0


class TestVarianceDecomposition:
    @pytest.mark.parametrize(
        "k,t,bound",
        [(2, 1.0, 1e-15), (3, 2.0, 1e-12), (2, 0.0, 0.0), (100, 1000.0, 1e-10)],
    )
    def test_residuals(self, k, t, bound):
        assert abs(moments.variance_decomposition_residual(k, t)) <= bound

    def test_exact_identity_in_rationals(self):
        # the split is exact term by term: series(k-1 terms) =
        # series(k-2 terms) + t**(2k-1)/(((k-1)!)**2 (2k-1))
        for k in (2, 3, 7, 15):
            t = Fraction(7, 3)
            last = t ** (2 * k - 1) / (
                Fraction(math.factorial(k - 1)) ** 2 * (2 * k - 1)
            )
            assert variance_series_exact(k, t, k - 1) == variance_series_exact(
                k, t, k - 2
            ) + last


class TestAdaptiveSimpson:
    def test_polynomial_exact(self):
        got = moments.adaptive_simpson(lambda x: x**3, 0.0, 2.0)
        assert math.isclose(got, 4.0, rel_tol=1e-12)

    def test_oscillatory(self):
        got = moments.adaptive_simpson(math.sin, 0.0, math.pi, tol=1e-12)
        assert math.isclose(got, 2.0, rel_tol=1e-10)

    def test_empty_interval(self):
        assert moments.adaptive_simpson(lambda x: 1.0, 1.0, 1.0) == 0.0
