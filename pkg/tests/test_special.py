"""Special-function layer against independent oracles.

Oracles: direct high-order series summation, scipy.special.hyp1f1, closed
forms for exponential/Erlang distributions, and adaptive quadrature of the
defining integrals of the two kernels.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import exprel, gammainc, gammaln, hyp1f1

from trialtelegraph import (
    DEFAULT_CONTROL,
    ParameterError,
    RangeOverflowError,
    SeriesControl,
    SeriesTruncationError,
    exp_ramp_conv,
    gamma_cdf,
    gamma_sum_cdf,
    gamma_tail,
    kummer_1f1,
    kummer_second_tail,
    pochhammer,
)


def series_1f1_oracle(a, b, z, n_terms=100):
    """Plain term-by-term Maclaurin sum, independent of the implementation."""
    total = 0.0
    for k in range(n_terms):
        num = 1.0
        den = 1.0
        for i in range(k):
            num *= a + i
            den *= b + i
        total += num / den * z**k / math.factorial(k)
    return total


def quad_gamma_sum_oracle(shape_x, rate_x, shape_y, rate_y, t):
    """P(X+Y<=t) by adaptive quadrature of int F_X(t-y) f_Y(y) dy."""

    def f(y):
        log_pdf = (
            shape_y * math.log(rate_y)
            + (shape_y - 1.0) * math.log(y)
            - rate_y * y
            - gammaln(shape_y)
        )
        return gammainc(shape_x, rate_x * (t - y)) * math.exp(log_pdf)

    val, _ = quad(f, 0.0, t, limit=300, epsabs=1e-13, epsrel=1e-13)
    return val


def quad_ramp_conv_oracle(alpha, beta, t):
    """Adaptive quadrature of the defining integral of exp_ramp_conv."""

    def f(y):
        u = t - y
        phi = 1.0 if alpha * u == 0.0 else math.expm1(alpha * u) / (alpha * u)
        return u * phi * math.exp(-alpha * u) * math.exp(-beta * y)

    val, _ = quad(f, 0.0, t, limit=300, epsabs=1e-13, epsrel=1e-13)
    return val


class TestPochhammer:
    def test_empty_product(self):
        assert pochhammer(2.5, 0) == 1.0

    def test_factorial(self):
        assert pochhammer(1.0, 4) == 24.0

    def test_by_hand(self):
        assert pochhammer(2.5, 3) == pytest.approx(2.5 * 3.5 * 4.5, rel=0, abs=0)

    def test_negative_alpha_hits_zero(self):
        assert pochhammer(-3.0, 5) == 0.0

    def test_overflow_is_typed(self):
        with pytest.raises(RangeOverflowError):
            pochhammer(1e300, 3)

    def test_bad_j(self):
        with pytest.raises(ParameterError):
            pochhammer(1.0, -1)


class TestKummer1F1:
    def test_at_zero(self):
        for a in (0.5, 1.0, 2.0, 3.5):
            for b in (0.5, 1.0, 2.0, 3.5):
                assert kummer_1f1(a, b, 0.0) == 1.0

    def test_known_values(self):
        assert kummer_1f1(1, 2, 0) == 1.0
        assert kummer_1f1(1, 2, 1) == pytest.approx(math.e - 1.0, rel=1e-14)

    def test_against_direct_series(self):
        oracle = series_1f1_oracle(1.0, 3.0, 2.0)
        assert kummer_1f1(1, 3, 2) == pytest.approx(oracle, rel=1e-12)
        # and via the reflection identity
        assert kummer_1f1(1, 3, 2) == pytest.approx(
            math.exp(2) * kummer_1f1(2, 3, -2), rel=1e-12
        )

    def test_against_scipy(self):
        for a in (0.5, 1.0, 2.0, 3.5):
            for b in (0.5, 1.0, 2.0, 3.5):
                for z in (-15.0, -3.0, -0.5, 0.7, 5.0, 30.0, 80.0):
                    assert kummer_1f1(a, b, z) == pytest.approx(
                        float(hyp1f1(a, b, z)), rel=5e-12
                    ), (a, b, z)

    def test_kummer_relation_residual(self):
        for a in (0.5, 1.0, 2.0, 3.5):
            for b in (0.5, 1.0, 2.0, 3.5):
                for z in np.linspace(-20.0, 20.0, 81):
                    lhs = kummer_1f1(a, b, z)
                    rhs = math.exp(z) * kummer_1f1(b - a, b, -z)
                    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs)), (a, b, z)

    def test_one_two_reduces_to_exprel(self):
        for z in np.linspace(-30.0, 30.0, 121):
            want = 1.0 if z == 0 else math.expm1(z) / z
            assert kummer_1f1(1, 2, z) == pytest.approx(want, rel=1e-12), z

    def test_asymptotic_regime(self):
        # 1F1(a,b;z) ~ Gamma(b)/Gamma(a) e^z z^{a-b} for large z > 0
        z = 200.0
        for a, b in ((0.5, 3.5), (1.0, 2.0), (2.0, 3.5)):
            scaled = kummer_1f1(a, b, z) * math.exp(-z) * z ** (b - a)
            want = math.exp(gammaln(b) - gammaln(a))
            assert scaled == pytest.approx(want, rel=0.01), (a, b)

    def test_invalid_denominator(self):
        for b in (0.0, -1.0, -3.0):
            with pytest.raises(ParameterError):
                kummer_1f1(1.0, b, 0.5)

    def test_truncation_error_carries_bound(self):
        with pytest.raises(SeriesTruncationError) as err:
            kummer_1f1(1.0, 2.0, 40.0, SeriesControl(rel_tol=1e-14, max_terms=5))
        assert err.value.max_terms == 5

    def test_second_tail_matches_definition(self):
        # the naive three-term difference is well-conditioned only away from 0
        for b in (1.5, 2.0, 4.0):
            for z in (0.3, 2.0, 40.0):
                want = (kummer_1f1(1.0, b, z) - 1.0 - z / b) / z
                assert kummer_second_tail(b, z) == pytest.approx(want, rel=1e-9)

    def test_second_tail_near_zero(self):
        # near 0 the dedicated series must reproduce z/(b(b+1)) + O(z^2),
        # which the naive difference cannot resolve in float64
        for b in (1.5, 4.0):
            for z in (1e-10, 1e-8):
                want = z / (b * (b + 1.0)) * (1.0 + z / (b + 2.0))
                assert kummer_second_tail(b, z) == pytest.approx(want, rel=1e-12)
        assert kummer_second_tail(2.0, 0.0) == 0.0


class TestGammaCdf:
    def test_exponential(self):
        assert gamma_cdf(1, 1, 1) == pytest.approx(1.0 - math.exp(-1), rel=1e-14)

    def test_erlang_two(self):
        assert gamma_cdf(2, 1, 1) == pytest.approx(1.0 - 2.0 * math.exp(-1), rel=1e-13)

    def test_at_zero(self):
        assert gamma_cdf(0.7, 2.0, 0.0) == 0.0
        assert gamma_cdf(3.0, 0.5, 0.0) == 0.0

    def test_monotone_and_saturating(self):
        for alpha, mu in ((0.5, 1.0), (1.0, 2.0), (4.5, 0.7)):
            ts = np.linspace(0.0, 50.0 / mu * max(1.0, alpha), 1000)
            vals = np.array([gamma_cdf(alpha, mu, t) for t in ts])
            assert np.all(np.diff(vals) >= -1e-15)
            assert np.all((vals >= 0.0) & (vals <= 1.0))
            assert vals[-1] == pytest.approx(1.0, abs=1e-9)

    def test_hypergeometric_identity(self):
        # (mu t)^a e^{-mu t} 1F1(1, a+1; mu t) / Gamma(a+1) is the same CDF
        for alpha in (0.5, 1.0, 2.5):
            for mu in (0.5, 2.0):
                for t in (0.2, 1.0, 5.0):
                    z = mu * t
                    ident = math.exp(
                        alpha * math.log(z) - z - gammaln(alpha + 1.0)
                    ) * kummer_1f1(1.0, alpha + 1.0, z)
                    assert gamma_cdf(alpha, mu, t) == pytest.approx(ident, rel=1e-12)

    def test_tail_complements(self):
        assert gamma_tail(2.0, 1.0, 1.0) == pytest.approx(2.0 * math.exp(-1), rel=1e-13)

    def test_domain(self):
        with pytest.raises(ParameterError):
            gamma_cdf(-1.0, 1.0, 1.0)
        with pytest.raises(ParameterError):
            gamma_cdf(1.0, 1.0, -0.5)


class TestGammaSumCdf:
    def test_at_zero(self):
        assert gamma_sum_cdf(0.7, 1.0, 2.0, 3.0, 0.0) == 0.0

    def test_two_unit_exponentials(self):
        want = 1.0 - 2.0 * math.exp(-1)  # Erlang-2
        assert gamma_sum_cdf(1, 1, 1, 1, 1) == pytest.approx(want, rel=1e-12)

    def test_spot_value_vs_quadrature(self):
        want = quad_gamma_sum_oracle(1.5, 2.0, 1.0, 1.0, 0.7)
        assert gamma_sum_cdf(1.5, 2.0, 1.0, 1.0, 0.7) == pytest.approx(want, abs=1e-8)

    def test_lattice_vs_quadrature(self):
        for shape_x in (0.5, 1.0, 2.5):
            for rate_x in (0.5, 1.0, 3.0):
                for shape_y in (0.5, 1.0, 2.5):
                    for rate_y in (0.5, 1.0, 3.0):
                        for t in (0.1, 1.0, 5.0):
                            got = gamma_sum_cdf(shape_x, rate_x, shape_y, rate_y, t)
                            want = quad_gamma_sum_oracle(
                                shape_x, rate_x, shape_y, rate_y, t
                            )
                            assert abs(got - want) <= 1e-8, (
                                shape_x, rate_x, shape_y, rate_y, t,
                            )

    def test_symmetric_in_the_two_variables(self):
        a = gamma_sum_cdf(1.5, 2.0, 0.7, 1.3, 2.0)
        b = gamma_sum_cdf(0.7, 1.3, 1.5, 2.0, 2.0)
        assert a == pytest.approx(b, rel=1e-11)

    def test_domain(self):
        with pytest.raises(ParameterError):
            gamma_sum_cdf(0.0, 1.0, 1.0, 1.0, 1.0)


class TestExpRampConv:
    def test_double_zero_branch(self):
        assert exp_ramp_conv(0.0, 0.0, 2.0) == pytest.approx(2.0, rel=0, abs=0)

    def test_zero_alpha_branch_matches_quadrature(self):
        # note: equals e^{-1} at (0, 1, 1); the defining integral is the authority
        got = exp_ramp_conv(0.0, 1.0, 1.0)
        assert got == pytest.approx(quad_ramp_conv_oracle(0.0, 1.0, 1.0), abs=1e-12)
        assert got == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_generic_branch_spot_value(self):
        want = quad_ramp_conv_oracle(1.0, 2.0, 0.5)
        assert exp_ramp_conv(1.0, 2.0, 0.5) == pytest.approx(want, abs=1e-8)

    def test_lattice_vs_quadrature(self):
        for alpha in (-2.0, 0.0, 1.0, 3.0):
            for beta in (-2.0, 0.0, 1.0, 3.0):
                for t in (0.1, 1.0, 5.0):
                    got = exp_ramp_conv(alpha, beta, t)
                    want = quad_ramp_conv_oracle(alpha, beta, t)
                    assert abs(got - want) <= 1e-8 * max(1.0, abs(want)), (alpha, beta, t)

    def test_tiny_alpha_is_continuous(self):
        # the Taylor fallback must splice smoothly onto both branches
        for beta in (-1.0, 0.0, 2.0):
            at_zero = exp_ramp_conv(0.0, beta, 1.5)
            for alpha in (1e-12, 1e-8, 1e-5):
                near = exp_ramp_conv(alpha, beta, 1.5)
                assert near == pytest.approx(at_zero, rel=1e-4)
                assert near == pytest.approx(
                    quad_ramp_conv_oracle(alpha, beta, 1.5), rel=1e-9
                )

    def test_at_t_zero(self):
        assert exp_ramp_conv(1.0, 1.0, 0.0) == 0.0

    def test_domain(self):
        with pytest.raises(ParameterError):
            exp_ramp_conv(1.0, 1.0, -1.0)


class TestSeriesControl:
    def test_defaults(self):
        assert DEFAULT_CONTROL.rel_tol == 1e-14
        assert DEFAULT_CONTROL.max_terms == 10_000

    def test_invalid(self):
        with pytest.raises(ParameterError):
            SeriesControl(rel_tol=0.0)
        with pytest.raises(ParameterError):
            SeriesControl(max_terms=0)


def test_exprel_is_the_one_two_case():
    # the library leans on exprel(z) == 1F1(1,2;z); pin that equivalence
    for z in (-5.0, -0.1, 0.3, 8.0):
        assert float(exprel(z)) == pytest.approx(kummer_1f1(1, 2, z), rel=1e-13)
