"""Exact-dynamics Monte Carlo for the trial-driven telegraph process.

Paths are simulated with the exact period bookkeeping: the n-th period's
velocity comes from trial n+1, and its duration is the j-th forward (or
backward) intertime where j counts same-direction periods so far.  Atom hits
are detected by integer arithmetic on the event "zero opposite-direction
periods started", never by floating-point position comparison.

The batch engine is vectorized across paths and addressed through
counter-based streams, so estimates are identical for any chunk size or
worker partition, and ``simulate_path`` reproduces any batch path bit for
bit from its (seed, path index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from . import intertimes as it
from .errors import ParameterError, SimulationLimitError
from .law import MotionParams
from .streams import PathStream, UniformStreams
from .trials import Bernoulli, Direction, TrialScheme, TrialState, sample_trial

_MAX_SWITCHES = 10_000_000
_DEFAULT_CHUNK = 1 << 18


@dataclass
class SamplePath:
    """One realization up to time t."""

    t: float
    epochs: list[float]          # T_0 = 0 < T_1 < ... <= t
    velocities: list[float]      # velocity on each period, incl. the running one
    displacements: list[float]   # signed displacement of each completed period
    final_position: float
    final_velocity: float

    @property
    def switches(self) -> int:
        """Number of epochs in (0, t]."""
        return len(self.epochs) - 1


def simulate_path(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    rng: PathStream,
) -> SamplePath:
    """Simulate one path; rng must yield one uniform per trial and duration."""
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    state = TrialState(scheme)
    epochs = [0.0]
    velocities: list[float] = []
    displacements: list[float] = []
    pos = 0.0
    now = 0.0
    n_fwd = n_bwd = 0
    while True:
        outcome, state = sample_trial(state, rng)
        if outcome:
            direction, speed = Direction.FORWARD, motion.c
            n_fwd += 1
            j = n_fwd
        else:
            direction, speed = Direction.BACKWARD, -motion.v
            n_bwd += 1
            j = n_bwd
        velocities.append(speed)
        dur = float(it.intertime_quantile(model, direction, j, rng.random()))
        if now + dur > t:
            return SamplePath(
                t=t,
                epochs=epochs,
                velocities=velocities,
                displacements=displacements,
                final_position=pos + speed * (t - now),
                final_velocity=speed,
            )
        pos += speed * dur
        now += dur
        epochs.append(now)
        displacements.append(speed * dur)
        if len(epochs) - 1 > _MAX_SWITCHES:
            raise SimulationLimitError(
                f"path exceeded {_MAX_SWITCHES} velocity switches before t={t}"
            )


@dataclass
class BatchResult:
    """Vectorized outcomes for a block of paths."""

    final_position: np.ndarray
    final_forward: np.ndarray   # bool: moving forward at t
    n_forward: np.ndarray       # forward periods started
    n_backward: np.ndarray      # backward periods started
    switches: np.ndarray        # completed epochs in (0, t]


def _duration_quantiles(model, direction, counts, u):
    """Vectorized inverse-CDF durations; counts[i] is the period's same-direction index."""
    rate = model.lam if direction is Direction.FORWARD else model.mu
    if isinstance(model, it.LinearRateExponential):
        return -np.log1p(-u) / (rate * counts)
    out = -np.log1p(-u) / rate
    if isinstance(model, it.GammaThenExponential):
        first = counts == 1
        if np.any(first):
            shape = (model.b if direction is Direction.FORWARD else model.r) / model.A + 1.0
            out[first] = gammaincinv(shape, u[first]) / rate
    return out


def simulate_batch(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    n_paths: int,
    seed: int,
    *,
    start_index: int = 0,
    force_initial: Direction | None = None,
    max_rounds: int = 1_000_000,
) -> BatchResult:
    """Simulate paths [start_index, start_index + n_paths) of the seed's population.

    force_initial fixes the first trial's outcome (the urn still absorbs the
    forced draw), which is how conditioning on V_0 is implemented.
    """
    if t <= 0.0:
        raise ParameterError(f"t must be > 0, got {t}")
    if n_paths < 1:
        raise ParameterError(f"n_paths must be >= 1, got {n_paths}")
    streams = UniformStreams(seed)
    n = int(n_paths)
    lo, hi = int(start_index), int(start_index) + n

    pos = np.zeros(n)
    now = np.zeros(n)
    n_fwd = np.zeros(n, dtype=np.int64)
    n_bwd = np.zeros(n, dtype=np.int64)
    n_trials = np.zeros(n, dtype=np.int64)
    n_succ = np.zeros(n, dtype=np.int64)
    switches = np.zeros(n, dtype=np.int64)
    final_pos = np.empty(n)
    final_fwd = np.zeros(n, dtype=bool)
    active = np.ones(n, dtype=bool)

    bern_p = scheme.p if isinstance(scheme, Bernoulli) else None
    r = 0
    while active.any():
        if r >= max_rounds:
            raise SimulationLimitError(
                f"{int(active.sum())} paths still running after {max_rounds} periods"
            )
        if r == 0 and force_initial is not None:
            x = np.full(n, force_initial is Direction.FORWARD)
        else:
            u_trial = streams.slice(2 * r, lo, hi)
            if bern_p is not None:
                x = u_trial < bern_p
            else:
                prob = (scheme.b + scheme.A * n_succ) / (
                    scheme.b + scheme.r + scheme.A * n_trials
                )
                x = u_trial < prob
        n_trials[active] += 1
        n_succ[active & x] += 1

        fwd = active & x
        bwd = active & ~x
        n_fwd[fwd] += 1
        n_bwd[bwd] += 1

        u_dur = streams.slice(2 * r + 1, lo, hi)
        dur = np.empty(n)
        if np.any(fwd):
            dur[fwd] = _duration_quantiles(model, Direction.FORWARD, n_fwd[fwd], u_dur[fwd])
        if np.any(bwd):
            dur[bwd] = _duration_quantiles(model, Direction.BACKWARD, n_bwd[bwd], u_dur[bwd])

        speed = np.where(x, motion.c, -motion.v)
        t_next = now + dur
        fin = active & (t_next > t)
        final_pos[fin] = pos[fin] + speed[fin] * (t - now[fin])
        final_fwd[fin] = x[fin]
        cont = active & ~fin
        pos[cont] += speed[cont] * dur[cont]
        now[cont] = t_next[cont]
        switches[cont] += 1
        active = cont
        r += 1

    return BatchResult(
        final_position=final_pos,
        final_forward=final_fwd,
        n_forward=n_fwd,
        n_backward=n_bwd,
        switches=switches,
    )


@dataclass
class EmpiricalLaw:
    """Monte Carlo estimate of the law of S_t."""

    t: float
    motion: MotionParams
    n_paths: int
    atom_forward_count: int
    atom_backward_count: int
    bin_edges: np.ndarray
    bin_counts: np.ndarray
    seed: int = 0

    @property
    def atom_forward_freq(self) -> float:
        return self.atom_forward_count / self.n_paths

    @property
    def atom_backward_freq(self) -> float:
        return self.atom_backward_count / self.n_paths

    @property
    def bin_density(self) -> np.ndarray:
        widths = np.diff(self.bin_edges)
        return self.bin_counts / (self.n_paths * widths)

    @property
    def bin_density_se(self) -> np.ndarray:
        widths = np.diff(self.bin_edges)
        phat = self.bin_counts / self.n_paths
        return np.sqrt(phat * (1.0 - phat) / self.n_paths) / widths

    def total_mass(self) -> float:
        """Exact counting identity: atoms + histogram = 1."""
        return (
            self.atom_forward_count + self.atom_backward_count + int(self.bin_counts.sum())
        ) / self.n_paths


def estimate_law(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    n_paths: int,
    bins: int,
    seed: int,
    chunk_size: int = _DEFAULT_CHUNK,
) -> EmpiricalLaw:
    """Histogram + atom frequencies over n_paths simulated paths.

    Mass at the extremes is routed to the atoms by the exact zero-opposite-
    period events; interior positions are clipped into the support before
    binning so counting stays exact under floating-point round-off.
    """
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    lo_x, hi_x = motion.support(t)
    edges = np.linspace(lo_x, hi_x, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    atom_fwd = atom_bwd = 0
    done = 0
    while done < n_paths:
        m = min(chunk_size, n_paths - done)
        batch = simulate_batch(scheme, model, motion, t, m, seed, start_index=done)
        at_plus = batch.n_backward == 0
        at_minus = batch.n_forward == 0
        atom_fwd += int(at_plus.sum())
        atom_bwd += int(at_minus.sum())
        interior = batch.final_position[~(at_plus | at_minus)]
        counts += np.histogram(np.clip(interior, lo_x, hi_x), bins=edges)[0]
        done += m
    return EmpiricalLaw(
        t=t,
        motion=motion,
        n_paths=n_paths,
        atom_forward_count=atom_fwd,
        atom_backward_count=atom_bwd,
        bin_edges=edges,
        bin_counts=counts,
        seed=seed,
    )


def estimate_mean_velocity(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    n_paths: int,
    initial: Direction,
    seed: int,
    chunk_size: int = _DEFAULT_CHUNK,
) -> tuple[float, float]:
    """(sample mean, standard error) of V_t over paths forced to start with
    the given velocity sign."""
    if isinstance(scheme, Bernoulli):
        p0 = scheme.p if initial is Direction.FORWARD else 1.0 - scheme.p
        if p0 == 0.0:
            raise ParameterError("cannot condition on an initial sign of probability 0")
    count = 0
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_paths:
        m = min(chunk_size, n_paths - done)
        batch = simulate_batch(
            scheme, model, motion, t, m, seed, start_index=done, force_initial=initial
        )
        vels = np.where(batch.final_forward, motion.c, -motion.v)
        count += m
        total += float(vels.sum())
        total_sq += float((vels**2).sum())
        done += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)


def estimate_mean_position(
    scheme: TrialScheme,
    model: it.IntertimeModel,
    motion: MotionParams,
    t: float,
    n_paths: int,
    seed: int,
    chunk_size: int = _DEFAULT_CHUNK,
) -> tuple[float, float]:
    """(sample mean, standard error) of S_t, unconditioned."""
    count = 0
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_paths:
        m = min(chunk_size, n_paths - done)
        batch = simulate_batch(scheme, model, motion, t, m, seed, start_index=done)
        count += m
        total += float(batch.final_position.sum())
        total_sq += float((batch.final_position**2).sum())
        done += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)
