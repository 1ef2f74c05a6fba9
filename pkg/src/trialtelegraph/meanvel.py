"""Conditional mean velocity E[V_t | V_0].

Decomposing over the number of completed periods k and the forward trial
count j among trials 2..k, and writing K(a, m) = P{sum of a forward + m
backward periods <= t}, the exact mean is

    E[V_t | V_0 = c] = c P{U_1 > t}
        + sum_k sum_j [ c J_c(k,j) (K(j+1, k-1-j) - K(j+2, k-1-j))
                      - v J_v(k,j) (K(j+1, k-1-j) - K(j+1, k-j)) ]

with J_c, J_v the joint laws of (count, k-th velocity sign) given the start.
The three evaluators below share this decomposition but compute K along
independent routes:

* mean_velocity_general -- K by adaptive quadrature of the intertime
  partial-sum laws (works for every scheme/intertime pair);
* mean_velocity_damped  -- closed form for the Bernoulli + linear-rate case,
  assembled from binomial expansions, 1F1(1,2;.) terms and the exp_ramp_conv
  kernel; inner sums alternate in sign and grow before cancelling, so shells
  whose float64 round-off estimate is too large are recomputed in
  multi-precision arithmetic (gmpy2);
* mean_velocity_polya   -- closed form for the Polya + Gamma-then-exponential
  case through differences of two-gamma-sum CDFs.
"""

from __future__ import annotations

import math

import gmpy2
from scipy.integrate import quad

from . import intertimes as it
from .errors import ParameterError
from .law import MotionParams, _atom_warmup
from .special import (
    DEFAULT_CONTROL,
    SeriesControl,
    exp_ramp_conv,
    gamma_cdf,
    gamma_sum_cdf,
    gamma_tail,
)
from .trials import (
    Bernoulli,
    Direction,
    Polya,
    TrialScheme,
    initial_forward_prob,
    joint_count_velocity_row,
    repeat_forward_prob,
)

_SHELL_CAP = 300
_SHELL_REL_TOL = 1e-10
_F64_SHELL_ERR_BUDGET = 1e-12


def _mirror_scheme(scheme: TrialScheme) -> TrialScheme:
    if isinstance(scheme, Bernoulli):
        if scheme.p >= 1.0:
            raise ParameterError("cannot condition on a backward start when p = 1")
        return Bernoulli(1.0 - scheme.p)
    return Polya(b=scheme.r, r=scheme.b, A=scheme.A)


def _mirror_model(model: it.IntertimeModel) -> it.IntertimeModel:
    if isinstance(model, it.LinearRateExponential):
        return it.LinearRateExponential(lam=model.mu, mu=model.lam)
    if isinstance(model, it.GammaThenExponential):
        return it.GammaThenExponential(
            b=model.r, r=model.b, A=model.A, lam=model.mu, mu=model.lam
        )
    return it.IidExponential(lam=model.mu, mu=model.lam)


def _shell_scale(total: float, motion: MotionParams) -> float:
    return abs(total) + 0.1 * (motion.c + motion.v)


def mean_velocity_general(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    k_cap: int = _SHELL_CAP,
    shell_rel_tol: float = _SHELL_REL_TOL,
    initial: Direction = Direction.FORWARD,
) -> float:
    """E[V_t | V_0] for any scheme/intertime pair, by quadrature.

    K(a, m) is computed as int_0^t F_D^(m)(t-s) f_U^(a)(s) ds; a backward
    start is handled by mirroring every parameter and negating the result.
    """
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    if initial is Direction.BACKWARD:
        return -mean_velocity_general(
            _mirror_scheme(scheme),
            _mirror_model(model),
            MotionParams(c=motion.v, v=motion.c),
            t,
            ctrl,
            k_cap,
            shell_rel_tol,
        )
    c, v = motion.c, motion.v
    cache: dict[tuple[int, int], float] = {}

    def K(a: int, m: int) -> float:
        key = (a, m)
        if key not in cache:
            if m == 0:
                cache[key] = float(it.partial_sum_cdf(model, Direction.FORWARD, a, t))
            else:
                val, _ = quad(
                    lambda s: it.partial_sum_cdf(model, Direction.BACKWARD, m, t - s)
                    * it.partial_sum_density(model, Direction.FORWARD, a, s),
                    0.0,
                    t,
                    limit=200,
                    epsabs=1e-11,
                    epsrel=1e-11,
                )
                cache[key] = val
        return cache[key]

    total = c * float(it.intertime_tail(model, Direction.FORWARD, 1, t))
    warmup = max(5, _atom_warmup(model, t))
    small = 0
    for k in range(1, k_cap + 1):
        jcf = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.FORWARD)
        jcb = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.BACKWARD)
        shell = 0.0
        for j in range(k):
            base = K(j + 1, k - 1 - j)
            shell += c * jcf[j] * (base - K(j + 2, k - 1 - j))
            shell -= v * jcb[j] * (base - K(j + 1, k - j))
        total += shell
        if k >= warmup and abs(shell) < shell_rel_tol * _shell_scale(total, motion):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return total


# ---------------------------------------------------------------------------
# damped Bernoulli closed form
# ---------------------------------------------------------------------------


def _damped_shell_f64(p, lam, mu, t, k, el, em):
    """(phi_k, psi_k, roundoff estimate) in float64.

    el[i] = e^{-lam i t}, em[i] = e^{-mu i t}.  Uses the identity
    t e^{-mu l t} 1F1(1,2;(mu l - lam(h+1))t) = (el[h+1] - em[l])/alpha.
    """
    phi_terms: list[float] = []
    psi_terms: list[float] = []
    q = 1.0 - p
    for j in range(k):
        wj = (j + 1) * math.comb(k - 1, j) * p**j * q ** (k - 1 - j)
        if wj == 0.0:
            continue
        for l in range(k - j):
            cl = math.comb(k - j - 1, l)
            for h in range(j + 1):
                cc = wj * cl * math.comb(j, h) * (1 if (l + h) % 2 == 0 else -1)
                alpha = mu * l - lam * (h + 1)
                lead = t * em[l] if alpha == 0.0 else (el[h + 1] - em[l]) / alpha
                phi_terms.append(
                    cc
                    * (
                        lead
                        - lam * (j + 2) * el[h + 1]
                        * exp_ramp_conv(alpha, lam * (j + 1 - h), t)
                    )
                )
                psi_terms.append(
                    cc
                    * (
                        lead
                        - mu * (k - j) * el[h + 1]
                        * exp_ramp_conv(alpha, mu * (k - j) - lam * (h + 1), t)
                    )
                )
    err = (sum(abs(x) for x in phi_terms) + sum(abs(x) for x in psi_terms)) * 5e-16
    return lam * math.fsum(phi_terms), lam * math.fsum(psi_terms), err


def _damped_shell_mp(p, lam, mu, t, k):
    """Same shell in gmpy2 multi-precision; precision grows with k to absorb
    the ~2^k growth of the alternating binomial terms."""
    bits = 128 + 2 * k
    with gmpy2.context(precision=bits):
        one = gmpy2.mpfr(1)
        P, T = gmpy2.mpfr(p), gmpy2.mpfr(t)
        L, M = gmpy2.mpfr(lam), gmpy2.mpfr(mu)
        Q = one - P
        el = [one]
        em = [one]
        eL, eM = gmpy2.exp(-L * T), gmpy2.exp(-M * T)
        for _ in range(k + 2):
            el.append(el[-1] * eL)
            em.append(em[-1] * eM)

        def phi1(z, ez):
            # (e^z - 1)/z with e^z supplied
            return one if z == 0 else (ez - one) / z

        phi = gmpy2.mpfr(0)
        psi = gmpy2.mpfr(0)
        for j in range(k):
            wj = (j + 1) * gmpy2.bincoef(k - 1, j) * P**j * Q ** (k - 1 - j)
            for l in range(k - j):
                cl = gmpy2.bincoef(k - j - 1, l)
                for h in range(j + 1):
                    cc = wj * cl * gmpy2.bincoef(j, h)
                    if (l + h) % 2:
                        cc = -cc
                    alpha = M * l - L * (h + 1)
                    lead = T * em[l] if alpha == 0 else (el[h + 1] - em[l]) / alpha

                    # phi kernel: beta = lam (j+1-h) > 0
                    beta = L * (j + 1 - h)
                    if alpha == 0:
                        hphi = (T / beta) * (one - phi1(-beta * T, el[j + 1 - h]))
                    else:
                        e_ab = el[j + 2] / em[l]  # e^{(alpha-beta) t}
                        hphi = (T / alpha) * (
                            phi1(-beta * T, el[j + 1 - h])
                            - (em[l] / el[h + 1]) * phi1((alpha - beta) * T, e_ab)
                        )
                    phi += cc * (lead - L * (j + 2) * el[h + 1] * hphi)

                    # psi kernel: beta = mu (k-j) - lam (h+1), any sign
                    beta = M * (k - j) - L * (h + 1)
                    e_mb = em[k - j] / el[h + 1]  # e^{-beta t}
                    if alpha == 0:
                        if beta == 0:
                            hpsi = T * T / 2
                        else:
                            hpsi = (T / beta) * (one - phi1(-beta * T, e_mb))
                    else:
                        e_ab = em[k - j - l]  # e^{(alpha-beta) t}
                        hpsi = (T / alpha) * (
                            phi1(-beta * T, e_mb)
                            - (em[l] / el[h + 1]) * phi1((alpha - beta) * T, e_ab)
                        )
                    psi += cc * (lead - M * (k - j) * el[h + 1] * hpsi)
        return float(L * phi), float(L * psi)


def mean_velocity_damped(
    p: float,
    lam: float,
    mu: float,
    motion: MotionParams,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    k_cap: int = _SHELL_CAP,
    shell_rel_tol: float = _SHELL_REL_TOL,
) -> float:
    """E[V_t | V_0 = c] for Bernoulli trials with linear-rate exponentials.

    Shells decay like (1 - e^{-min(lam,mu) t})^k while the expansion's terms
    grow like 2^k, so the route is practical for min(lam, mu) * t up to ~2.5
    (a couple of seconds); beyond that prefer mean_velocity_general, whose
    quadrature shells are positive and unconditionally stable.
    """
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"need 0 < p <= 1, got {p}")
    if lam <= 0.0 or mu <= 0.0 or t <= 0.0:
        raise ParameterError("need lam, mu > 0 and t > 0")
    c, v = motion.c, motion.v
    q = 1.0 - p
    el = [math.exp(-lam * i * t) for i in range(k_cap + 3)]
    em = [math.exp(-mu * i * t) for i in range(k_cap + 3)]
    total = c * el[1]
    small = 0
    for k in range(1, k_cap + 1):
        phi_k, psi_k, err = _damped_shell_f64(p, lam, mu, t, k, el, em)
        if err > _F64_SHELL_ERR_BUDGET:
            phi_k, psi_k = _damped_shell_mp(p, lam, mu, t, k)
        shell = c * p * phi_k - v * q * psi_k
        total += shell
        if k >= 5 and abs(shell) < shell_rel_tol * _shell_scale(total, motion):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return total


# ---------------------------------------------------------------------------
# Polya closed form
# ---------------------------------------------------------------------------


def _polya_K(b, r, A, lam, mu, t, ctrl, cache, a, m):
    key = (a, m)
    if key not in cache:
        if m == 0:
            cache[key] = gamma_cdf(b / A + a, lam, t)
        else:
            cache[key] = gamma_sum_cdf(r / A + m, mu, b / A + a, lam, t, ctrl)
    return cache[key]


def polya_shell_windows(
    b, r, A, lam, mu, t, k, ctrl: SeriesControl = DEFAULT_CONTROL, cache=None
):
    """Conditional window probabilities for the k-th shell:
    (P{T_k <= t < T_{k+1} | k-th sign forward, forward start}, same backward).
    Both lie in [0, 1]."""
    if cache is None:
        cache = {}
    scheme = Polya(b=b, r=r, A=A)
    jcf = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.FORWARD)
    jcb = joint_count_velocity_row(scheme, k, Direction.FORWARD, Direction.BACKWARD)
    pi = repeat_forward_prob(scheme)
    phi = psi = 0.0
    for j in range(k):
        base = _polya_K(b, r, A, lam, mu, t, ctrl, cache, j + 1, k - 1 - j)
        phi += jcf[j] * (base - _polya_K(b, r, A, lam, mu, t, ctrl, cache, j + 2, k - 1 - j))
        psi += jcb[j] * (base - _polya_K(b, r, A, lam, mu, t, ctrl, cache, j + 1, k - j))
    return phi / pi, psi / (1.0 - pi)


def mean_velocity_polya(
    b: float,
    r: float,
    A: float,
    lam: float,
    mu: float,
    motion: MotionParams,
    t: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    k_cap: int = _SHELL_CAP,
    shell_rel_tol: float = _SHELL_REL_TOL,
) -> float:
    """E[V_t | V_0 = c] for Polya trials with Gamma-then-exponential intertimes."""
    if min(b, r, A, lam, mu) <= 0.0 or t <= 0.0:
        raise ParameterError("need b, r, A, lam, mu > 0 and t > 0")
    c, v = motion.c, motion.v
    scheme = Polya(b=b, r=r, A=A)
    pi = repeat_forward_prob(scheme)
    cache: dict[tuple[int, int], float] = {}
    total = c * gamma_tail(b / A + 1.0, lam, t)
    warmup = max(5, int(math.ceil(max(lam, mu) * t)) + 3)
    small = 0
    for k in range(1, k_cap + 1):
        phi_k, psi_k = polya_shell_windows(b, r, A, lam, mu, t, k, ctrl, cache)
        shell = c * pi * phi_k - v * (1.0 - pi) * psi_k
        total += shell
        if k >= warmup and abs(shell) < shell_rel_tol * _shell_scale(total, motion):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return total


def mean_position_iid_check(
    scheme: TrialScheme, model: it.IntertimeModel, motion: MotionParams, t: float
) -> float:
    """Exact E[S_t] = t E[Z_0] for the configuration in which all period
    durations are i.i.d. exponential with one shared rate (so durations are
    independent of the velocity signs).  Rejects anything else."""
    if not isinstance(model, it.IidExponential):
        raise ParameterError(
            "the identity E[S_t] = t E[Z_0] needs i.i.d. exponential intertimes"
        )
    if model.lam != model.mu:
        raise ParameterError(
            f"forward and backward rates must coincide, got {model.lam} != {model.mu}"
        )
    if t < 0.0:
        raise ParameterError(f"t must be >= 0, got {t}")
    p0 = initial_forward_prob(scheme)
    return t * (motion.c * p0 - motion.v * (1.0 - p0))
