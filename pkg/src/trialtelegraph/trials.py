"""Velocity-sign trial process: Bernoulli and classical Polya urn schemes.

Trial n+1 has success probability p (Bernoulli) or
(b + A * successes) / (b + r + A * trials) (Polya urn: a drawn ball is
returned with A extra balls of its colour).  A success means the next
movement period runs forward.  The module also evaluates, in closed form,
the distribution of the number of forward outcomes among trials 2..k and
its joint law with the k-th velocity sign, conditioned on the initial sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError


class Direction(enum.Enum):
    """Movement direction: FORWARD carries speed c, BACKWARD speed -v."""

    FORWARD = 1
    BACKWARD = 0

    @property
    def opposite(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


@dataclass(frozen=True)
class Bernoulli:
    """Independent trials with fixed success probability p.

    p = 1 is allowed (degenerate all-forward motion); p = 0 is not, mirroring
    the constraint b > 0 of the urn parametrization p = b/(b+r).
    """

    p: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ParameterError(f"Bernoulli needs 0 < p <= 1, got {self.p}")


@dataclass(frozen=True)
class Polya:
    """Classical Polya urn: b black (forward) balls, r red, reinforcement A.

    Parameters may be any positive reals.  A = 0 would reduce to independent
    trials; construct Bernoulli(b/(b+r)) for that case instead.
    """

    b: float
    r: float
    A: float

    def __post_init__(self):
        if self.b <= 0.0 or self.r <= 0.0:
            raise ParameterError(f"Polya needs b, r > 0, got b={self.b}, r={self.r}")
        if self.A <= 0.0:
            raise ParameterError(
                "Polya needs A > 0; for A = 0 use Bernoulli(p=b/(b+r))"
            )


TrialScheme = Union[Bernoulli, Polya]


def initial_forward_prob(scheme: TrialScheme) -> float:
    """P{first trial succeeds} = P{initial velocity is forward}."""
    if isinstance(scheme, Bernoulli):
        return scheme.p
    return scheme.b / (scheme.b + scheme.r)


def repeat_forward_prob(scheme: TrialScheme) -> float:
    """P{trial n succeeds | trial 1 succeeded}, the same for every n >= 2.

    Equals p for Bernoulli and (b+A)/(b+A+r) for the urn (exchangeability).
    """
    if isinstance(scheme, Bernoulli):
        return scheme.p
    return (scheme.b + scheme.A) / (scheme.b + scheme.A + scheme.r)


@dataclass(frozen=True)
class TrialState:
    """Running tally of a sequentially sampled trial sequence."""

    scheme: TrialScheme
    n_trials: int = 0
    n_successes: int = 0

    def __post_init__(self):
        if not (0 <= self.n_successes <= self.n_trials):
            raise ParameterError(
                f"need 0 <= n_successes <= n_trials, got {self.n_successes}/{self.n_trials}"
            )


def next_success_prob(state: TrialState) -> float:
    """P{next trial succeeds | history summarized by state}."""
    scheme = state.scheme
    if isinstance(scheme, Bernoulli):
        return scheme.p
    return (scheme.b + scheme.A * state.n_successes) / (
        scheme.b + scheme.r + scheme.A * state.n_trials
    )


def sample_trial(state: TrialState, rng) -> tuple[int, TrialState]:
    """Draw one trial by inverse CDF (outcome 1 iff u < success probability).

    rng is any object with a .random() method returning a uniform in [0, 1).
    """
    outcome = 1 if rng.random() < next_success_prob(state) else 0
    new_state = replace(
        state, n_trials=state.n_trials + 1, n_successes=state.n_successes + outcome
    )
    return outcome, new_state


def _log_binom(n: int, j) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    return gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)


def _log_poch(alpha: float, j) -> np.ndarray:
    """log (alpha)_j for alpha > 0 via log-gamma, stable for large j."""
    j = np.asarray(j, dtype=float)
    return gammaln(alpha + j) - gammaln(alpha)


@dataclass(frozen=True)
class CountDistribution:
    """pmf[j] = P{forward count among trials 2..k equals j | initial sign}."""

    k: int
    initial: Direction
    pmf: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"trial horizon k must be >= 1, got {self.k}")
        if len(self.pmf) != self.k:
            raise ParameterError("pmf must have k entries (j = 0..k-1)")


def count_dist(scheme: TrialScheme, k: int, initial: Direction) -> CountDistribution:
    """Distribution of the forward count among trials 2..k given the first trial.

    k = 1 is the (empty) convention: the count is 0 with probability 1.
    For Bernoulli the law is Binomial(k-1, p) regardless of the first trial;
    for the urn it is the Polya-Eggenberger law started from the post-first
    composition (b+A black if the first ball was black, r+A red otherwise).
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    j = np.arange(k, dtype=float)
    if isinstance(scheme, Bernoulli):
        p = scheme.p
        with np.errstate(divide="ignore", invalid="ignore"):
            # p = 1 gives log1p(-p) = -inf; entries with a zero exponent are
            # masked to 0 by the where, so the stray 0 * inf never escapes
            logp = np.where(j > 0, j * np.log(p), 0.0)
            logq = np.where(k - 1 - j > 0, (k - 1 - j) * np.log1p(-p), 0.0)
        pmf = np.exp(_log_binom(k - 1, j) + logp + logq)
    else:
        b, r, A = scheme.b, scheme.r, scheme.A
        total = (b + A + r) / A
        if initial is Direction.FORWARD:
            up, down = (b + A) / A, r / A
        else:
            up, down = b / A, (r + A) / A
        pmf = np.exp(
            _log_binom(k - 1, j)
            + _log_poch(up, j)
            + _log_poch(down, k - 1 - j)
            - _log_poch(total, k - 1)
        )
    return CountDistribution(k=k, initial=initial, pmf=pmf)


def joint_count_velocity(
    scheme: TrialScheme, k: int, j: int, initial: Direction, zk: Direction
) -> float:
    """P{forward count among trials 2..k = j, k-th velocity = zk | initial sign}.

    The k-th velocity is decided by trial k+1, so this is the count law above
    tilted by the conditional success probability of the (k+1)-th trial.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not (0 <= j <= k - 1):
        raise ParameterError(f"need 0 <= j <= k-1, got j={j}, k={k}")
    if isinstance(scheme, Bernoulli):
        p = scheme.p
        base = float(count_dist(scheme, k, initial).pmf[j])
        return base * (p if zk is Direction.FORWARD else 1.0 - p)
    b, r, A = scheme.b, scheme.r, scheme.A
    total = (b + A + r) / A
    if initial is Direction.FORWARD:
        up, down = (b + A) / A, r / A
    else:
        up, down = b / A, (r + A) / A
    j_up = j + 1 if zk is Direction.FORWARD else j
    j_down = (k - 1 - j) + (0 if zk is Direction.FORWARD else 1)
    log_val = (
        _log_binom(k - 1, float(j))
        + _log_poch(up, float(j_up))
        + _log_poch(down, float(j_down))
        - _log_poch(total, float(k))
    )
    return float(np.exp(log_val))


def joint_count_velocity_row(
    scheme: TrialScheme, k: int, initial: Direction, zk: Direction
) -> np.ndarray:
    """joint_count_velocity for all j = 0..k-1 at once."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    j = np.arange(k, dtype=float)
    if isinstance(scheme, Bernoulli):
        w = scheme.p if zk is Direction.FORWARD else 1.0 - scheme.p
        return count_dist(scheme, k, initial).pmf * w
    b, r, A = scheme.b, scheme.r, scheme.A
    total = (b + A + r) / A
    if initial is Direction.FORWARD:
        up, down = (b + A) / A, r / A
    else:
        up, down = b / A, (r + A) / A
    j_up = j + 1.0 if zk is Direction.FORWARD else j
    j_down = (k - 1.0 - j) + (0.0 if zk is Direction.FORWARD else 1.0)
    return np.exp(
        _log_binom(k - 1, j)
        + _log_poch(up, j_up)
        + _log_poch(down, j_down)
        - _log_poch(total, float(k))
    )
