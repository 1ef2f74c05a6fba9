"""Exact probability law of the particle position S_t.

The law has atoms at the extremes ct (never moved backward) and -vt (never
moved forward) plus an absolutely continuous part on (-vt, ct).  Closed
forms are available for two configurations:

* Bernoulli trials + LinearRateExponential intertimes ("damped" motion) --
  the density is a tilted logistic kernel in the forward-time variable; when
  lambda*v == mu*c it converges to a stationary logistic density.
* Polya trials + GammaThenExponential intertimes -- the density is assembled
  from Kummer 1F1 tail series and gamma survival functions.

A general truncated-series evaluator (valid for any scheme/intertime pair)
is provided for cross-validation; it sums, over the number of velocity
switches, products of trial-count probabilities, partial-sum densities and
single-period survivals, with the inner time integrals done by adaptive
quadrature.

Everywhere tau = (v t + x)/(c + v) is the total forward-motion time needed
to sit at x at time t; the backward budget is t - tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, gammaln, logit

from . import intertimes as it
from .errors import NoStationaryLawError, ParameterError, SeriesTruncationError
from .special import DEFAULT_CONTROL, SeriesControl, gamma_tail, kummer_second_tail
from .trials import (
    Bernoulli,
    Direction,
    Polya,
    TrialScheme,
    initial_forward_prob,
    joint_count_velocity_row,
)

_QUAD_ABS_TOL = 1e-9  # inner integrals of the series evaluator


@dataclass(frozen=True)
class MotionParams:
    """Forward speed c and backward speed v (velocities are c and -v)."""

    c: float
    v: float

    def __post_init__(self):
        if self.c <= 0.0 or self.v <= 0.0:
            raise ParameterError(f"speeds must be > 0, got c={self.c}, v={self.v}")

    def support(self, t: float) -> tuple[float, float]:
        return (-self.v * t, self.c * t)


def tau_star(motion: MotionParams, x: float, t: float) -> float:
    """Forward-motion time (v t + x)/(c + v); requires x in the open support."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    lo, hi = motion.support(t)
    if not (lo < x < hi):
        raise ParameterError(f"x={x} outside the open support ({lo}, {hi})")
    return (motion.v * t + x) / (motion.c + motion.v)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------


def atoms_damped(p: float, lam: float, mu: float, t: float) -> tuple[float, float]:
    """Atom masses (at ct, at -vt) for Bernoulli trials with linear-rate
    exponential intertimes: p e^{-lam t} / (1 - p(1 - e^{-lam t})) and the
    mirrored expression."""
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"need 0 < p <= 1, got {p}")
    if lam <= 0.0 or mu <= 0.0 or t < 0.0:
        raise ParameterError("need lam, mu > 0 and t >= 0")
    eu, ed = math.exp(-lam * t), math.exp(-mu * t)
    q = 1.0 - p
    return p * eu / (q + p * eu), q * ed / (p + q * ed)


def atoms_polya(
    b: float,
    r: float,
    A: float,
    lam: float,
    mu: float,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> tuple[float, float]:
    """Atom masses for Polya trials with Gamma-then-exponential intertimes."""
    if min(b, r, A, lam, mu) <= 0.0 or t < 0.0:
        raise ParameterError("need b, r, A, lam, mu > 0 and t >= 0")
    if t == 0.0:
        return b / (b + r), r / (b + r)
    B = (b + A + r) / A

    def one_side(w, shape_ratio, rate):
        z = rate * t
        tail = gamma_tail(shape_ratio + 1.0, rate, t)
        # (z)^{shape_ratio} e^{-z} / Gamma(shape_ratio+1) * [1F1(1,B;z) - 1]
        # with 1F1(1,B;z) - 1 = z (1/B + second tail), cancellation-free
        series = math.exp(shape_ratio * math.log(z) - z - gammaln(shape_ratio + 1.0))
        series *= z * (1.0 / B + kummer_second_tail(B, z, ctrl))
        return w * (tail + series)

    return (
        one_side(b / (b + r), b / A, lam),
        one_side(r / (b + r), r / A, mu),
    )


def _atom_warmup(model: it.IntertimeModel, t: float) -> int:
    if isinstance(model, it.LinearRateExponential):
        return 3
    return int(math.ceil(max(model.lam, model.mu) * t)) + 5


def atoms_general(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> tuple[float, float]:
    """Atom masses from the general series: the k-th term is the probability
    that the first k+1 trials all point the same way, times the probability
    that exactly k same-direction periods complete by t."""
    if t < 0.0:
        raise ParameterError(f"t must be >= 0, got {t}")
    warmup = _atom_warmup(model, t)

    def one_side(direction: Direction) -> float:
        p0 = initial_forward_prob(scheme)
        if direction is Direction.BACKWARD:
            p0 = 1.0 - p0
        if p0 == 0.0:
            return 0.0
        if isinstance(scheme, Bernoulli):
            ratio = lambda k: scheme.p if direction is Direction.FORWARD else 1.0 - scheme.p
        else:
            a0 = (scheme.b + scheme.A) / scheme.A
            if direction is Direction.BACKWARD:
                a0 = (scheme.r + scheme.A) / scheme.A
            B = (scheme.b + scheme.A + scheme.r) / scheme.A
            ratio = lambda k: (a0 + k - 1.0) / (B + k - 1.0)
        total = p0 * it.intertime_tail(model, direction, 1, t)
        w = p0
        cdf_prev = it.partial_sum_cdf(model, direction, 1, t)
        small = 0
        for k in range(1, ctrl.max_terms + 1):
            w *= ratio(k)
            cdf_next = it.partial_sum_cdf(model, direction, k + 1, t)
            term = w * (cdf_prev - cdf_next)
            total += term
            cdf_prev = cdf_next
            if k > warmup and term <= ctrl.rel_tol * max(total, 1e-300):
                small += 1
                if small >= 3:
                    return total
            else:
                small = 0
        raise SeriesTruncationError(
            f"atom series did not converge within {ctrl.max_terms} terms",
            max_terms=ctrl.max_terms,
        )

    return one_side(Direction.FORWARD), one_side(Direction.BACKWARD)


# ---------------------------------------------------------------------------
# damped Bernoulli closed forms
# ---------------------------------------------------------------------------


def _damped_weight(p: float, lam: float, mu: float, tau: float, t: float) -> float:
    # g = sigma(logit(p) + mu t - (lam+mu) tau); the whole law is built on it
    return float(expit(logit(p) + mu * t - (lam + mu) * tau))


def density_damped_split(
    p: float,
    lam: float,
    mu: float,
    motion: MotionParams,
    x: float,
    t: float,
    initial: Direction,
) -> tuple[float, float]:
    """(forward-moving, backward-moving) density components given the
    initial velocity sign, at interior x."""
    if not (0.0 < p <= 1.0) or lam <= 0.0 or mu <= 0.0:
        raise ParameterError("need 0 < p <= 1 and lam, mu > 0")
    tau = tau_star(motion, x, t)
    cv = motion.c + motion.v
    g = _damped_weight(p, lam, mu, tau, t)
    if initial is Direction.FORWARD:
        f = (mu / cv) * g * (1.0 - g) * (-math.expm1(-lam * tau))
        bb = (lam / cv) * (1.0 - g) * (g + (1.0 - g) * math.exp(-lam * tau))
    else:
        f = (mu / cv) * g * ((1.0 - g) + g * math.exp(-mu * (t - tau)))
        bb = (lam / cv) * (1.0 - g) * g * (-math.expm1(-mu * (t - tau)))
    return f, bb


def density_damped_given(
    p: float,
    lam: float,
    mu: float,
    motion: MotionParams,
    x: float,
    t: float,
    initial: Direction,
) -> float:
    """p(x, t | initial velocity sign) for the damped Bernoulli case."""
    f, bb = density_damped_split(p, lam, mu, motion, x, t, initial)
    return f + bb


def density_damped(
    p: float, lam: float, mu: float, motion: MotionParams, x: float, t: float
) -> float:
    """Unconditional density p(x, t) for the damped Bernoulli case.

    Equals ((lam+mu)/(c+v)) g (1-g) with the logistic weight g; the
    conditional mixture p * p(x,t|+) + (1-p) * p(x,t|-) collapses to it.
    """
    if not (0.0 < p <= 1.0) or lam <= 0.0 or mu <= 0.0:
        raise ParameterError("need 0 < p <= 1 and lam, mu > 0")
    tau = tau_star(motion, x, t)
    g = _damped_weight(p, lam, mu, tau, t)
    return (lam + mu) / (motion.c + motion.v) * g * (1.0 - g)


def density_damped_edge_limits(
    p: float, lam: float, mu: float, motion: MotionParams, t: float
) -> tuple[float, float]:
    """Limits of p(x, t) as x tends to -vt (left) and ct (right)."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    cv = motion.c + motion.v
    g_left = float(expit(logit(p) + mu * t))
    g_right = float(expit(logit(p) - lam * t))
    return (
        (lam + mu) / cv * g_left * (1.0 - g_left),
        (lam + mu) / cv * g_right * (1.0 - g_right),
    )


def stationary_damped(
    p: float, lam: float, mu: float, motion: MotionParams, x: float
) -> float:
    """Stationary logistic density, defined only when lam*v == mu*c.

    Location m = s ln(p/(1-p)) and scale s = v/mu = c/lam; the variance is
    pi^2 s^2 / 3.  When lam*v != mu*c no stationary density exists (the
    density drifts to 0 pointwise) and NoStationaryLawError is raised.
    """
    if not (0.0 < p < 1.0):
        raise ParameterError(f"stationary density needs 0 < p < 1, got {p}")
    if lam <= 0.0 or mu <= 0.0:
        raise ParameterError("need lam, mu > 0")
    lv, mc = lam * motion.v, mu * motion.c
    if abs(lv - mc) > 1e-12 * max(lv, mc):
        raise NoStationaryLawError(
            f"no stationary density: lam*v={lv} differs from mu*c={mc}"
        )
    s = motion.v / mu
    m = s * math.log(p / (1.0 - p))
    u = (x - m) / s
    sig = float(expit(u))
    return sig * (1.0 - sig) / s


def stationary_damped_params(
    p: float, lam: float, mu: float, motion: MotionParams
) -> tuple[float, float]:
    """(location m, scale s) of the stationary logistic density."""
    if not (0.0 < p < 1.0):
        raise ParameterError(f"stationary density needs 0 < p < 1, got {p}")
    lv, mc = lam * motion.v, mu * motion.c
    if abs(lv - mc) > 1e-12 * max(lv, mc):
        raise NoStationaryLawError(
            f"no stationary density: lam*v={lv} differs from mu*c={mc}"
        )
    s = motion.v / mu
    return s * math.log(p / (1.0 - p)), s


# ---------------------------------------------------------------------------
# Polya closed forms
# ---------------------------------------------------------------------------


def _polya_parts(b, r, A, lam, mu, motion, x, t, ctrl):
    """Return (f|+, b|+, f|-, b|-), the four velocity-resolved components."""
    tau = tau_star(motion, x, t)
    cv = motion.c + motion.v
    B = (b + A + r) / A
    lt = lam * tau
    mt = mu * (t - tau)
    z = lt + mt

    tail_z = kummer_second_tail(B, z, ctrl)
    eta_fwd = tail_z - kummer_second_tail(B, lt, ctrl)
    eta_bwd = tail_z - kummer_second_tail(B, mt, ctrl)

    log_xi = (
        -z
        + (b / A + 1.0) * math.log(lt)
        + (r / A) * math.log(mt)
        - math.log(cv)
        - gammaln(b / A + 1.0)
        - gammaln(r / A)
    )
    log_xi_m = (
        -z
        + (b / A) * math.log(lt)
        + (r / A + 1.0) * math.log(mt)
        - math.log(cv)
        - gammaln(r / A + 1.0)
        - gammaln(b / A)
    )
    xi = math.exp(log_xi)
    xi_m = math.exp(log_xi_m)

    # boundary-layer terms; (z)^{shape} (1/B + tail) is the stable rewrite of
    # (z)^{shape-1} [1F1(1,B;z) - 1]
    first_fwd = (
        r
        * lam
        * lt ** (b / A)
        * (1.0 / B + kummer_second_tail(B, lt, ctrl))
        * math.exp(-lt)
        * gamma_tail(r / A + 1.0, mu, t - tau)
        / (cv * A * math.exp(gammaln(b / A + 1.0)))
    )
    first_bwd = (
        b
        * mu
        * mt ** (r / A)
        * (1.0 / B + kummer_second_tail(B, mt, ctrl))
        * math.exp(-mt)
        * gamma_tail(b / A + 1.0, lam, tau)
        / (cv * A * math.exp(gammaln(r / A + 1.0)))
    )

    f_fwd = xi * eta_fwd / (t - tau)
    b_fwd = first_fwd + xi * eta_fwd / tau
    f_bwd = first_bwd + xi_m * eta_bwd / (t - tau)
    b_bwd = xi_m * eta_bwd / tau
    return f_fwd, b_fwd, f_bwd, b_bwd


def _check_polya_params(b, r, A, lam, mu):
    if min(b, r, A, lam, mu) <= 0.0:
        raise ParameterError("need b, r, A, lam, mu > 0")


def density_polya_split(
    b, r, A, lam, mu, motion: MotionParams, x: float, t: float, initial: Direction,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> tuple[float, float]:
    """(forward-moving, backward-moving) density components given the
    initial velocity sign."""
    _check_polya_params(b, r, A, lam, mu)
    f_fwd, b_fwd, f_bwd, b_bwd = _polya_parts(b, r, A, lam, mu, motion, x, t, ctrl)
    if initial is Direction.FORWARD:
        return f_fwd, b_fwd
    return f_bwd, b_bwd


def density_polya_given(
    b, r, A, lam, mu, motion: MotionParams, x: float, t: float, initial: Direction,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    f, bb = density_polya_split(b, r, A, lam, mu, motion, x, t, initial, ctrl)
    return f + bb


def density_polya(
    b, r, A, lam, mu, motion: MotionParams, x: float, t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Unconditional density p(x, t) for the Polya/Gamma-then-exponential case."""
    _check_polya_params(b, r, A, lam, mu)
    f_fwd, b_fwd, f_bwd, b_bwd = _polya_parts(b, r, A, lam, mu, motion, x, t, ctrl)
    w = b / (b + r)
    return w * (f_fwd + b_fwd) + (1.0 - w) * (f_bwd + b_bwd)


def density_polya_edge_limits(
    b, r, A, lam, mu, motion: MotionParams, t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> tuple[float, float]:
    """Limits of p(x, t) as x tends to -vt (left) and ct (right)."""
    _check_polya_params(b, r, A, lam, mu)
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    cv = motion.c + motion.v
    B = (b + A + r) / A

    def edge(shape_ratio, rate):
        z = rate * t
        val = rate * z ** shape_ratio * (1.0 / B + kummer_second_tail(B, z, ctrl))
        return (
            b * r * val * math.exp(-z)
            / ((b + r) * cv * A * math.exp(gammaln(shape_ratio + 1.0)))
        )

    return edge(r / A, mu), edge(b / A, lam)


# ---------------------------------------------------------------------------
# general truncated-series density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesDensity:
    """Density value from the switch-count series, with truncation diagnostics.

    The four components resolve the density by (initial sign, sign at t);
    given_forward = f_forward_start + b_forward_start, and the blended value
    weighs the two conditional densities by the initial law.
    """

    value: float
    given_forward: float
    given_backward: float
    f_forward_start: float
    b_forward_start: float
    f_backward_start: float
    b_backward_start: float
    shells: int
    last_rel: float
    converged: bool


class _WindowProbs:
    """P{exactly a same-direction periods complete within a time window},
    computed by adaptive quadrature of (partial-sum density) x (next-period
    survival) and cached per window."""

    def __init__(self, model, direction, window):
        self.model = model
        self.direction = direction
        self.window = window
        self._vals = [float(it.intertime_tail(model, direction, 1, window))]

    def __getitem__(self, a: int) -> float:
        while len(self._vals) <= a:
            n = len(self._vals)
            if self.window <= 0.0:
                self._vals.append(0.0)
                continue
            val, _ = quad(
                lambda u: it.partial_sum_density(self.model, self.direction, n, u)
                * it.intertime_tail(self.model, self.direction, n + 1, self.window - u),
                0.0,
                self.window,
                limit=100,
                epsabs=_QUAD_ABS_TOL,
                epsrel=1e-9,
            )
            self._vals.append(val)
        return self._vals[a]


def density_general_series(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    x: float,
    t: float,
    k_max: int = 200,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    shell_rel_tol: float = 1e-12,
) -> SeriesDensity:
    """Density at interior x by summing over the number of velocity switches.

    The shell for k switches combines the joint law of (forward trial count,
    k-th velocity) with the density of the completed same-direction budget
    and the probability that the remaining periods fit the opposite budget.
    Truncates at k_max or once two consecutive shells fall below
    shell_rel_tol relative to the running total.
    """
    if k_max < 1:
        raise ParameterError(f"k_max must be >= 1, got {k_max}")
    tau = tau_star(motion, x, t)
    # keep quadrature endpoints strictly inside the window
    eps = 1e-13 * t
    tau = min(max(tau, eps), t - eps)
    cv = motion.c + motion.v

    fwd_win = _WindowProbs(model, Direction.FORWARD, tau)       # A_U[a]
    bwd_win = _WindowProbs(model, Direction.BACKWARD, t - tau)  # A_D[m]

    fU = [np.nan]  # partial-sum densities at tau, index by count
    fD = [np.nan]  # partial-sum densities at t - tau

    def _extend(k):
        while len(fU) <= k:
            fU.append(float(it.partial_sum_density(model, Direction.FORWARD, len(fU), tau)))
        while len(fD) <= k:
            fD.append(float(it.partial_sum_density(model, Direction.BACKWARD, len(fD), t - tau)))

    p0 = initial_forward_prob(scheme)
    tot = {"ff": 0.0, "bf": 0.0, "fb": 0.0, "bb": 0.0}
    warmup = max(8, _atom_warmup(model, t))
    small = 0
    last_rel = math.inf
    shells = 0
    converged = False
    for k in range(1, k_max + 1):
        _extend(k)
        jcf = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.FORWARD)
        jcb = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.BACKWARD)
        jvf = joint_count_velocity_row(scheme, k, Direction.BACKWARD, Direction.FORWARD)
        jvb = joint_count_velocity_row(scheme, k, Direction.BACKWARD, Direction.BACKWARD)

        sh = {"ff": 0.0, "bf": 0.0, "fb": 0.0, "bb": 0.0}
        for j in range(0, k - 1):  # forward start, still moving forward at t
            sh["ff"] += jcf[j] * fD[k - 1 - j] * fwd_win[j + 1]
        for j in range(0, k):  # forward start, moving backward at t
            sh["bf"] += jcb[j] * fU[j + 1] * bwd_win[k - 1 - j]
        for m in range(0, k):  # backward start, moving forward at t
            sh["fb"] += jvf[m] * fD[k - m] * fwd_win[m]
        for m in range(1, k):  # backward start, moving backward at t
            sh["bb"] += jvb[m] * fU[m] * bwd_win[k - m]

        for key in tot:
            tot[key] += sh[key] / cv
        shells = k
        blended = p0 * (tot["ff"] + tot["bf"]) + (1.0 - p0) * (tot["fb"] + tot["bb"])
        shell_blend = p0 * (sh["ff"] + sh["bf"]) + (1.0 - p0) * (sh["fb"] + sh["bb"])
        last_rel = shell_blend / cv / max(blended, 1e-300)
        if k >= warmup and last_rel < shell_rel_tol:
            small += 1
            if small >= 2:
                converged = True
                break
        else:
            small = 0

    given_fwd = tot["ff"] + tot["bf"]
    given_bwd = tot["fb"] + tot["bb"]
    return SeriesDensity(
        value=p0 * given_fwd + (1.0 - p0) * given_bwd,
        given_forward=given_fwd,
        given_backward=given_bwd,
        f_forward_start=tot["ff"],
        b_forward_start=tot["bf"],
        f_backward_start=tot["fb"],
        b_backward_start=tot["bb"],
        shells=shells,
        last_rel=last_rel,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# evaluated law objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessLaw:
    """The law of S_t at a fixed time: atoms plus density evaluators.

    Atom queries and density queries are separate; the density evaluators
    raise ParameterError outside the open support.
    """

    kind: str
    t: float
    motion: MotionParams
    atom_forward: float
    atom_backward: float
    forward_start_prob: float
    _density: Callable[[float], float]
    _density_given: Callable[[float, Direction], float]
    _density_split: Callable[[float, Direction], tuple[float, float]]

    @property
    def support(self) -> tuple[float, float]:
        return self.motion.support(self.t)

    def density(self, x: float) -> float:
        return self._density(x)

    def density_given(self, x: float, initial: Direction) -> float:
        return self._density_given(x, initial)

    def density_split(self, x: float, initial: Direction) -> tuple[float, float]:
        """(still moving forward, moving backward) components of p(x,t|initial)."""
        return self._density_split(x, initial)

    def atom_given(self, initial: Direction) -> float:
        """P{S_t sits on its own extreme | initial velocity sign}."""
        if initial is Direction.FORWARD:
            w = self.forward_start_prob
            return self.atom_forward / w if w > 0.0 else 0.0
        w = 1.0 - self.forward_start_prob
        return self.atom_backward / w if w > 0.0 else 0.0


def damped_law(
    p: float, lam: float, mu: float, motion: MotionParams, t: float
) -> ProcessLaw:
    """Closed-form law for Bernoulli trials + linear-rate exponentials."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    ap, am = atoms_damped(p, lam, mu, t)
    return ProcessLaw(
        kind="damped-bernoulli",
        t=t,
        motion=motion,
        atom_forward=ap,
        atom_backward=am,
        forward_start_prob=p,
        _density=lambda x: density_damped(p, lam, mu, motion, x, t),
        _density_given=lambda x, d: density_damped_given(p, lam, mu, motion, x, t, d),
        _density_split=lambda x, d: density_damped_split(p, lam, mu, motion, x, t, d),
    )


def polya_law(
    b: float,
    r: float,
    A: float,
    lam: float,
    mu: float,
    motion: MotionParams,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> ProcessLaw:
    """Closed-form law for Polya trials + Gamma-then-exponential intertimes."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    ap, am = atoms_polya(b, r, A, lam, mu, t, ctrl)
    return ProcessLaw(
        kind="polya-gamma",
        t=t,
        motion=motion,
        atom_forward=ap,
        atom_backward=am,
        forward_start_prob=b / (b + r),
        _density=lambda x: density_polya(b, r, A, lam, mu, motion, x, t, ctrl),
        _density_given=lambda x, d: density_polya_given(
            b, r, A, lam, mu, motion, x, t, d, ctrl
        ),
        _density_split=lambda x, d: density_polya_split(
            b, r, A, lam, mu, motion, x, t, d, ctrl
        ),
    )


def series_law(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    k_max: int = 200,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> ProcessLaw:
    """General law evaluated through the truncated switch-count series."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    ap, am = atoms_general(scheme, model, t, ctrl)

    def dens(x):
        return density_general_series(scheme, model, motion, x, t, k_max, ctrl).value

    def dens_given(x, d):
        res = density_general_series(scheme, model, motion, x, t, k_max, ctrl)
        return res.given_forward if d is Direction.FORWARD else res.given_backward

    def dens_split(x, d):
        res = density_general_series(scheme, model, motion, x, t, k_max, ctrl)
        if d is Direction.FORWARD:
            return res.f_forward_start, res.b_forward_start
        return res.f_backward_start, res.b_backward_start

    return ProcessLaw(
        kind="series",
        t=t,
        motion=motion,
        atom_forward=ap,
        atom_backward=am,
        forward_start_prob=initial_forward_prob(scheme),
        _density=dens,
        _density_given=dens_given,
        _density_split=dens_split,
    )
