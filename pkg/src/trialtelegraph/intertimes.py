"""Duration families for the forward/backward movement periods.

Three families are provided; U_k below is the duration of the k-th forward
period (D_k backward, with the mu-side parameters):

* LinearRateExponential -- U_k ~ Exp(lambda * k): stochastically shrinking
  steps; the k-fold partial sum is distributed like the maximum of k i.i.d.
  Exp(lambda) variables.
* GammaThenExponential -- U_1 ~ Gamma(b/A + 1, lambda), U_k ~ Exp(lambda)
  for k >= 2, sharing (b, r, A) with the Polya urn it accompanies; partial
  sums are Gamma(b/A + k, lambda).
* IidExponential -- U_k ~ Exp(lambda) for every k; partial sums are Erlang.
  This is the delayed-renewal-free special case in which the period
  durations are independent of the velocity signs whenever lambda == mu.

Samplers are inverse-CDF (exact distribution, one uniform per draw), which
keeps the counter-based stream accounting of the Monte Carlo engine aligned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammainc, gammaincc, gammaincinv, gammaln

from .errors import ParameterError
from .trials import Direction


@dataclass(frozen=True)
class LinearRateExponential:
    lam: float
    mu: float

    def __post_init__(self):
        if self.lam <= 0.0 or self.mu <= 0.0:
            raise ParameterError(f"rates must be > 0, got lam={self.lam}, mu={self.mu}")


@dataclass(frozen=True)
class GammaThenExponential:
    b: float
    r: float
    A: float
    lam: float
    mu: float

    def __post_init__(self):
        if min(self.b, self.r, self.A) <= 0.0:
            raise ParameterError(
                f"b, r, A must be > 0, got b={self.b}, r={self.r}, A={self.A}"
            )
        if self.lam <= 0.0 or self.mu <= 0.0:
            raise ParameterError(f"rates must be > 0, got lam={self.lam}, mu={self.mu}")


@dataclass(frozen=True)
class IidExponential:
    lam: float
    mu: float

    def __post_init__(self):
        if self.lam <= 0.0 or self.mu <= 0.0:
            raise ParameterError(f"rates must be > 0, got lam={self.lam}, mu={self.mu}")


IntertimeModel = Union[LinearRateExponential, GammaThenExponential, IidExponential]


def _rate(model: IntertimeModel, direction: Direction) -> float:
    return model.lam if direction is Direction.FORWARD else model.mu


def _first_shape(model: GammaThenExponential, direction: Direction) -> float:
    # shape of the first intertime: b/A + 1 forward, r/A + 1 backward
    return (model.b if direction is Direction.FORWARD else model.r) / model.A + 1.0


def _check_k(k: int) -> None:
    if k < 1:
        raise ParameterError(f"period index k must be >= 1, got {k}")


def _partial_shape(model: IntertimeModel, direction: Direction, k: int) -> float:
    """Gamma shape of the k-fold partial sum (gamma-type families only)."""
    if isinstance(model, GammaThenExponential):
        return _first_shape(model, direction) + (k - 1)
    return float(k)  # IidExponential: Erlang-k


def intertime_tail(model: IntertimeModel, direction: Direction, k: int, t) -> float:
    """Survival P{k-th intertime > t}."""
    _check_k(k)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ParameterError("t must be >= 0")
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        out = np.exp(-rate * k * t)
    elif isinstance(model, GammaThenExponential) and k == 1:
        out = gammaincc(_first_shape(model, direction), rate * t)
    else:
        out = np.exp(-rate * t)
    return float(out) if out.ndim == 0 else out


def intertime_density(model: IntertimeModel, direction: Direction, k: int, t) -> float:
    """Density of the k-th intertime at t > 0."""
    _check_k(k)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise ParameterError("density is evaluated for t > 0 only")
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        out = rate * k * np.exp(-rate * k * t)
    elif isinstance(model, GammaThenExponential) and k == 1:
        a = _first_shape(model, direction)
        out = np.exp(a * np.log(rate) + (a - 1.0) * np.log(t) - rate * t - gammaln(a))
    else:
        out = rate * np.exp(-rate * t)
    return float(out) if out.ndim == 0 else out


def partial_sum_density(model: IntertimeModel, direction: Direction, k: int, t):
    """Density of the sum of the first k same-direction intertimes at t > 0."""
    _check_k(k)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise ParameterError("density is evaluated for t > 0 only")
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        e = np.exp(-rate * t)
        out = k * rate * e * (1.0 - e) ** (k - 1)
    else:
        a = _partial_shape(model, direction, k)
        out = np.exp(a * np.log(rate) + (a - 1.0) * np.log(t) - rate * t - gammaln(a))
    return float(out) if out.ndim == 0 else out


def partial_sum_cdf(model: IntertimeModel, direction: Direction, k: int, t):
    """CDF of the sum of the first k same-direction intertimes."""
    _check_k(k)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ParameterError("t must be >= 0")
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        # the partial sum is distributed as the max of k i.i.d. exponentials
        out = (1.0 - np.exp(-rate * t)) ** k
    else:
        out = gammainc(_partial_shape(model, direction, k), rate * t)
    return float(out) if out.ndim == 0 else out


def partial_sum_tail(model: IntertimeModel, direction: Direction, k: int, t):
    """Survival of the sum of the first k same-direction intertimes."""
    _check_k(k)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ParameterError("t must be >= 0")
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        with np.errstate(divide="ignore"):
            out = -np.expm1(k * np.log1p(-np.exp(-rate * t)))
    else:
        out = gammaincc(_partial_shape(model, direction, k), rate * t)
    return float(out) if out.ndim == 0 else out


def intertime_quantile(model: IntertimeModel, direction: Direction, k: int, u):
    """Inverse CDF of the k-th intertime, vectorized over u in [0, 1)."""
    _check_k(k)
    u = np.asarray(u, dtype=float)
    rate = _rate(model, direction)
    if isinstance(model, LinearRateExponential):
        out = -np.log1p(-u) / (rate * k)
    elif isinstance(model, GammaThenExponential) and k == 1:
        out = gammaincinv(_first_shape(model, direction), u) / rate
    else:
        out = -np.log1p(-u) / rate
    return float(out) if out.ndim == 0 else out


def sample_intertime(model: IntertimeModel, direction: Direction, k: int, rng) -> float:
    """Draw one k-th intertime from rng (anything with .random())."""
    return float(intertime_quantile(model, direction, k, rng.random()))
