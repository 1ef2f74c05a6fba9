"""Special-function layer.

Pochhammer symbols, Kummer's confluent hypergeometric function 1F1, gamma
distribution functions, and the two convolution kernels that the closed-form
laws and mean-velocity series are assembled from:

* ``gamma_sum_cdf`` -- P(X + Y <= t) for independent Gamma variables X, Y,
  evaluated through a double series in 1F1.
* ``exp_ramp_conv`` -- the convolution of the saturating ramp
  (1 - exp(-alpha*u))/alpha with an exponential weight exp(-beta*y),
  which has a three-branch closed form.

All functions are pure and raise typed errors instead of returning NaN/inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import exprel, gammainc, gammaincc, gammaln

from .errors import ParameterError, RangeOverflowError, SeriesTruncationError

# Above this |z| the direct Maclaurin sum of 1F1 is replaced by log-domain
# accumulation (positive-parameter case) to dodge intermediate overflow.
_DIRECT_Z_CUTOFF = 50.0

_LOG_FLOAT_MAX = math.log(1.7976931348623157e308)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the infinite series in this module.

    rel_tol is a relative tolerance on the running sum, max_terms a hard cap
    after which SeriesTruncationError is raised.
    """

    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0.0):
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ParameterError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def pochhammer(alpha: float, j: int) -> float:
    """Ascending factorial (alpha)_j = alpha (alpha+1) ... (alpha+j-1).

    (alpha)_0 = 1 exactly.  Overflow raises RangeOverflowError rather than
    returning inf.
    """
    if j < 0 or j != int(j):
        raise ParameterError(f"j must be a nonnegative integer, got {j}")
    out = 1.0
    for i in range(int(j)):
        out *= alpha + i
        if not math.isfinite(out):
            raise RangeOverflowError(
                f"pochhammer({alpha}, {j}) exceeds the floating-point range"
            )
    return out


def _check_1f1_denominator(b: float) -> None:
    if b == 0.0 or (b < 0.0 and b == int(b)):
        raise ParameterError(
            f"1F1 denominator parameter must not be zero or a negative integer, got {b}"
        )


def _maclaurin_1f1(a: float, b: float, z: float, ctrl: SeriesControl) -> float:
    """Direct Maclaurin sum of 1F1; adequate for |z| <= ~50."""
    total = 1.0
    term = 1.0
    small = 0
    for k in range(ctrl.max_terms):
        term *= (a + k) / (b + k) * z / (k + 1)
        total += term
        if not math.isfinite(total):
            raise RangeOverflowError(f"1F1({a},{b};{z}) overflowed during summation")
        if term == 0.0:
            return total  # terminating polynomial (a a nonpositive integer)
        if abs(term) <= ctrl.rel_tol * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise SeriesTruncationError(
        f"1F1({a},{b};{z}) did not converge within {ctrl.max_terms} terms",
        achieved=abs(term) / max(abs(total), 1.0),
        max_terms=ctrl.max_terms,
    )


def _log_1f1_positive(a: float, b: float, z: float, ctrl: SeriesControl) -> float:
    """log 1F1(a,b;z) for a, b, z > 0 via online log-sum-exp over positive terms."""
    log_term = 0.0
    log_max = 0.0
    acc = 1.0  # sum of exp(log_term - log_max)
    for k in range(ctrl.max_terms):
        log_term += math.log((a + k) / (b + k)) + math.log(z / (k + 1))
        if log_term > log_max:
            acc = acc * math.exp(log_max - log_term) + 1.0
            log_max = log_term
        else:
            acc += math.exp(log_term - log_max)
        # terms rise until k ~ z, then decay factorially
        if k > z and log_term - (log_max + math.log(acc)) < math.log(ctrl.rel_tol):
            return log_max + math.log(acc)
    raise SeriesTruncationError(
        f"log-domain 1F1({a},{b};{z}) did not converge within {ctrl.max_terms} terms",
        max_terms=ctrl.max_terms,
    )


def kummer_1f1(a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Kummer's confluent hypergeometric function 1F1(a, b; z).

    Strategy: Maclaurin summation with term-ratio early exit for |z| <= 50;
    the reflection 1F1(a,b;z) = e^z 1F1(b-a,b;-z) maps z < 0 onto a
    positive-argument series to avoid cancellation; log-domain accumulation
    for z > 50 with positive parameters.
    """
    _check_1f1_denominator(b)
    if z == 0.0:
        return 1.0
    if z < 0.0:
        a2 = b - a
        if -z <= _DIRECT_Z_CUTOFF or not (a2 > 0.0 and b > 0.0):
            return math.exp(z) * _maclaurin_1f1(a2, b, -z, ctrl)
        log_val = z + _log_1f1_positive(a2, b, -z, ctrl)
        return math.exp(log_val) if log_val > -745.0 else 0.0
    if z <= _DIRECT_Z_CUTOFF or not (a > 0.0 and b > 0.0):
        return _maclaurin_1f1(a, b, z, ctrl)
    log_val = _log_1f1_positive(a, b, z, ctrl)
    if log_val > _LOG_FLOAT_MAX:
        raise RangeOverflowError(f"1F1({a},{b};{z}) exceeds the floating-point range")
    return math.exp(log_val)


def kummer_second_tail(b: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """(1F1(1, b; z) - 1 - z/b) / z, stable near z = 0.

    Uses 1F1(1,b;z) = sum_k z^k/(b)_k, so the result is
    sum_{m>=1} z^m / (b)_{m+1}; for z >= 0 every term is positive and the
    cancellation of the naive three-term difference never happens.
    """
    _check_1f1_denominator(b)
    if z == 0.0:
        return 0.0
    term = z / (b * (b + 1.0))
    total = term
    small = 0
    for m in range(1, ctrl.max_terms):
        term *= z / (b + m + 1.0)
        total += term
        if abs(term) <= ctrl.rel_tol * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
        if not math.isfinite(total):
            raise RangeOverflowError(f"1F1 tail series overflowed for b={b}, z={z}")
    raise SeriesTruncationError(
        f"1F1 tail series did not converge for b={b}, z={z}",
        max_terms=ctrl.max_terms,
    )


def gamma_cdf(alpha: float, mu: float, t: float) -> float:
    """P(X <= t) for X ~ Gamma(shape alpha, rate mu).

    Delegates to the regularized lower incomplete gamma function, which is
    the numerically robust equivalent of the 1F1 identity
    (mu t)^alpha e^{-mu t} 1F1(1, alpha+1; mu t) / Gamma(alpha+1)
    (the identity itself is exercised in the test suite).
    """
    if alpha <= 0.0 or mu <= 0.0:
        raise ParameterError(f"gamma_cdf needs alpha, mu > 0, got {alpha}, {mu}")
    if t < 0.0:
        raise ParameterError(f"gamma_cdf needs t >= 0, got {t}")
    return float(gammainc(alpha, mu * t))


def gamma_tail(alpha: float, mu: float, t: float) -> float:
    """P(X > t) for X ~ Gamma(shape alpha, rate mu)."""
    if alpha <= 0.0 or mu <= 0.0:
        raise ParameterError(f"gamma_tail needs alpha, mu > 0, got {alpha}, {mu}")
    if t < 0.0:
        raise ParameterError(f"gamma_tail needs t >= 0, got {t}")
    return float(gammaincc(alpha, mu * t))


def gamma_sum_cdf(
    shape_x: float,
    rate_x: float,
    shape_y: float,
    rate_y: float,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """P(X + Y <= t) for independent X ~ Gamma(shape_x, rate_x), Y ~ Gamma(shape_y, rate_y).

    Evaluated by the series

        (rate_x t)^shape_x (rate_y t)^shape_y e^{-rate_x t}
        sum_h (rate_x t)^h / Gamma(shape_x+shape_y+h+1)
              * 1F1(shape_y, shape_x+shape_y+h+1; (rate_x-rate_y) t).

    The outer series is truncated once the additive term stays below
    rel_tol times the running sum for three consecutive terms (terms are not
    monotone when rate_x < rate_y).
    """
    if min(shape_x, rate_x, shape_y, rate_y) <= 0.0:
        raise ParameterError("gamma_sum_cdf needs all shapes and rates > 0")
    if t < 0.0:
        raise ParameterError(f"gamma_sum_cdf needs t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    z = (rate_x - rate_y) * t
    log_xt = math.log(rate_x * t)
    base = shape_x * log_xt + shape_y * math.log(rate_y * t) - rate_x * t
    total = 0.0
    small = 0
    for h in range(ctrl.max_terms):
        log_pref = base + h * log_xt - gammaln(shape_x + shape_y + h + 1.0)
        term = math.exp(log_pref) * kummer_1f1(shape_y, shape_x + shape_y + h + 1.0, z, ctrl)
        total += term
        if abs(term) <= ctrl.rel_tol * max(abs(total), 1e-300):
            small += 1
            if small >= 3:
                return min(total, 1.0)
        else:
            small = 0
    raise SeriesTruncationError(
        f"gamma_sum_cdf series did not converge within {ctrl.max_terms} terms",
        achieved=abs(term) / max(abs(total), 1e-300),
        max_terms=ctrl.max_terms,
    )


def exp_ramp_conv(alpha: float, beta: float, t: float) -> float:
    """integral_0^t (t-y) phi(alpha (t-y)) e^{-alpha (t-y)} e^{-beta y} dy
    with phi(z) = (e^z - 1)/z, i.e. the convolution of the saturating ramp
    (1 - e^{-alpha u})/alpha with the weight e^{-beta y}.

    Closed form (phi(z) below is exprel(z) = (e^z-1)/z):

        alpha != 0          : (t/alpha) [phi(-beta t) - e^{-alpha t} phi((alpha-beta) t)]
        alpha == 0, beta != 0: (t/beta) [1 - phi(-beta t)]
        alpha == beta == 0  : t^2 / 2

    Branch selection tests the inputs for exact zero (callers pass structural
    zeros).  For 0 < |alpha| t < 1e-3 the generic branch cancels badly, so a
    short Taylor expansion in alpha is used instead.
    """
    if t < 0.0:
        raise ParameterError(f"exp_ramp_conv needs t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if alpha == 0.0:
        if beta == 0.0:
            return 0.5 * t * t
        return (t / beta) * (1.0 - float(exprel(-beta * t)))
    if abs(alpha) * t < 1e-3:
        # (1-e^{-alpha u})/alpha = sum_m (-alpha)^m u^{m+1}/(m+1)! termwise against
        # int_0^t (t-y)^n e^{-beta y} dy = t^{n+1} 1F1(1, n+2; -beta t)/(n+1)
        total = 0.0
        coeff = 1.0  # (-alpha)^m / (m+1)!
        for m in range(8):
            total += coeff * t ** (m + 2) / (m + 2) * kummer_1f1(1.0, m + 3.0, -beta * t)
            coeff *= -alpha / (m + 2)
        return total
    value = (t / alpha) * (
        float(exprel(-beta * t)) - math.exp(-alpha * t) * float(exprel((alpha - beta) * t))
    )
    if not math.isfinite(value):
        raise RangeOverflowError(
            f"exp_ramp_conv({alpha}, {beta}, {t}) exceeds the floating-point range"
        )
    return value
