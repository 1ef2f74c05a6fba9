"""Monte Carlo engine: exact bookkeeping, determinism, analytic agreement."""

import math

import numpy as np
import pytest

from trialtelegraph import (
    Bernoulli,
    Direction,
    GammaThenExponential,
    IidExponential,
    LinearRateExponential,
    MotionParams,
    ParameterError,
    PathStream,
    Polya,
    SimulationLimitError,
    atoms_damped,
    atoms_polya,
    damped_law,
    estimate_law,
    estimate_mean_velocity,
    simulate_batch,
    simulate_path,
)
from trialtelegraph.validate import check_empirical_vs_analytic

M11 = MotionParams(1.0, 1.0)
DAMPED = (Bernoulli(0.3), LinearRateExponential(1.0, 1.0))
POLYA = (Polya(1.0, 1.0, 1.0), GammaThenExponential(1.0, 1.0, 1.0, 1.0, 1.0))


class TestSimulatePath:
    def test_deterministic_replay(self):
        sch, mod = POLYA
        a = simulate_path(sch, mod, M11, 2.0, PathStream(5, 9))
        b = simulate_path(sch, mod, M11, 2.0, PathStream(5, 9))
        assert a.final_position == b.final_position
        assert a.epochs == b.epochs
        assert a.velocities == b.velocities

    def test_degenerate_forward_motion(self):
        sp = simulate_path(Bernoulli(1.0), LinearRateExponential(1.0, 1.0), M11, 1.0, PathStream(0, 0))
        assert all(v == 1.0 for v in sp.velocities)
        assert sp.final_position == pytest.approx(1.0, rel=1e-12)
        assert sp.final_velocity == 1.0

    def test_piecewise_linear_bookkeeping(self):
        sp = simulate_path(*DAMPED, M11, 3.0, PathStream(11, 4))
        # epochs/velocities/displacements must be mutually consistent
        assert len(sp.velocities) == len(sp.epochs)
        assert len(sp.displacements) == len(sp.epochs) - 1
        for k in range(len(sp.displacements)):
            dur = sp.epochs[k + 1] - sp.epochs[k]
            assert sp.displacements[k] == pytest.approx(sp.velocities[k] * dur, rel=1e-12)
        partial = sum(sp.displacements)
        tail = sp.final_velocity * (3.0 - sp.epochs[-1])
        assert sp.final_position == pytest.approx(partial + tail, rel=1e-9, abs=1e-12)

    def test_position_in_support(self):
        for i in range(40):
            sp = simulate_path(*POLYA, M11, 1.5, PathStream(2, i))
            lo, hi = M11.support(1.5)
            assert lo - 1e-9 <= sp.final_position <= hi + 1e-9


class TestBatchEngine:
    def test_batch_equals_scalar_paths(self):
        for sch, mod in (DAMPED, POLYA):
            batch = simulate_batch(sch, mod, M11, 1.7, 60, seed=13)
            for i in range(60):
                sp = simulate_path(sch, mod, M11, 1.7, PathStream(13, i))
                assert sp.final_position == batch.final_position[i]
                assert (sp.final_velocity > 0) == bool(batch.final_forward[i])
                assert sp.switches == batch.switches[i]

    def test_start_index_slices_population(self):
        sch, mod = DAMPED
        whole = simulate_batch(sch, mod, M11, 1.0, 100, seed=3)
        part = simulate_batch(sch, mod, M11, 1.0, 40, seed=3, start_index=60)
        np.testing.assert_array_equal(whole.final_position[60:], part.final_position)

    def test_period_count_bookkeeping(self):
        # forward periods started = forward entries among Z_0..Z_{M_t}, i.e.
        # first trial + forward count among later trials + the running period
        for sch, mod in (DAMPED, POLYA):
            batch = simulate_batch(sch, mod, M11, 1.3, 50, seed=21)
            for i in range(50):
                sp = simulate_path(sch, mod, M11, 1.3, PathStream(21, i))
                n_fwd = sum(1 for v in sp.velocities if v > 0)
                n_bwd = sum(1 for v in sp.velocities if v < 0)
                assert batch.n_forward[i] == n_fwd
                assert batch.n_backward[i] == n_bwd
                assert n_fwd + n_bwd == sp.switches + 1

    def test_atom_events_are_integer_exact(self):
        sch, mod = DAMPED
        batch = simulate_batch(sch, mod, M11, 1.0, 2000, seed=1)
        at_plus = batch.n_backward == 0
        # a never-backward path sits at ct up to float addition error
        assert np.allclose(batch.final_position[at_plus], 1.0, atol=1e-12)
        assert np.all(batch.final_position[~at_plus] < 1.0)

    def test_round_cap_raises(self):
        with pytest.raises(SimulationLimitError):
            simulate_batch(*DAMPED, M11, 1000.0, 10, seed=0, max_rounds=3)

    def test_domain(self):
        with pytest.raises(ParameterError):
            simulate_batch(*DAMPED, M11, 0.0, 10, seed=0)
        with pytest.raises(ParameterError):
            simulate_batch(*DAMPED, M11, 1.0, 0, seed=0)


class TestEstimateLaw:
    def test_exact_mass_accounting(self):
        emp = estimate_law(*POLYA, M11, 1.0, 20_000, 30, seed=2)
        assert emp.total_mass() == 1.0
        assert emp.n_paths == 20_000
        assert emp.bin_counts.sum() + emp.atom_forward_count + emp.atom_backward_count == 20_000

    def test_chunking_invariance(self):
        a = estimate_law(*POLYA, M11, 1.0, 5000, 25, seed=4, chunk_size=5000)
        b = estimate_law(*POLYA, M11, 1.0, 5000, 25, seed=4, chunk_size=311)
        np.testing.assert_array_equal(a.bin_counts, b.bin_counts)
        assert a.atom_forward_count == b.atom_forward_count
        assert a.atom_backward_count == b.atom_backward_count

    def test_atom_frequencies_match_closed_forms(self):
        n = 200_000
        emp = estimate_law(*DAMPED, M11, 1.0, n, 50, seed=7)
        ap, am = atoms_damped(0.3, 1.0, 1.0, 1.0)
        for freq, target in ((emp.atom_forward_freq, ap), (emp.atom_backward_freq, am)):
            se = math.sqrt(target * (1.0 - target) / n)
            assert abs(freq - target) <= 3.0 * se

        emp = estimate_law(*POLYA, M11, 1.0, n, 50, seed=8)
        ap, am = atoms_polya(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        for freq, target in ((emp.atom_forward_freq, ap), (emp.atom_backward_freq, am)):
            se = math.sqrt(target * (1.0 - target) / n)
            assert abs(freq - target) <= 3.0 * se

    def test_histogram_tracks_density(self):
        n = 200_000
        emp = estimate_law(*DAMPED, M11, 1.0, n, 50, seed=11)
        law = damped_law(0.3, 1.0, 1.0, M11, 1.0)
        checks = check_empirical_vs_analytic(emp, law)
        assert all(c.passed for c in checks)


class TestEstimateMeanVelocity:
    def test_short_time_degenerates_to_start(self):
        mean, se = estimate_mean_velocity(*DAMPED, M11, 1e-9, 2000, Direction.FORWARD, seed=0)
        assert mean == 1.0 and se == 0.0
        mean, _ = estimate_mean_velocity(*DAMPED, M11, 1e-9, 2000, Direction.BACKWARD, seed=0)
        assert mean == -1.0

    def test_forcing_updates_the_urn(self):
        # forced forward start reinforces forward: short-time second-period
        # velocity should be forward with probability (b+A)/(b+A+r) = 2/3
        sch, mod = Polya(1.0, 1.0, 1.0), IidExponential(50.0, 50.0)
        n = 40_000
        mean, se = estimate_mean_velocity(sch, mod, M11, 1.0, n, Direction.FORWARD, seed=6)
        # at rate 50 and t=1 the walk has ~50 periods; just sanity-check sign
        assert mean > 0.0

    def test_rejects_impossible_conditioning(self):
        with pytest.raises(ParameterError):
            estimate_mean_velocity(
                Bernoulli(1.0), LinearRateExponential(1.0, 1.0), M11, 1.0, 100,
                Direction.BACKWARD, seed=0,
            )
