"""Trial schemes against exhaustive enumeration and hand computations."""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from trialtelegraph import (
    Bernoulli,
    Direction,
    ParameterError,
    Polya,
    TrialState,
    count_dist,
    enumerate_joint,
    initial_forward_prob,
    joint_count_velocity,
    next_success_prob,
    repeat_forward_prob,
    sample_trial,
)
from trialtelegraph.trials import joint_count_velocity_row


@dataclass
class FixedU:
    """Stub uniform source returning a preset value."""

    u: float

    def random(self):
        return self.u


class TestSchemes:
    def test_bernoulli_domain(self):
        with pytest.raises(ParameterError):
            Bernoulli(p=0.0)
        with pytest.raises(ParameterError):
            Bernoulli(p=1.2)
        Bernoulli(p=1.0)  # degenerate all-forward motion is allowed

    def test_polya_domain(self):
        with pytest.raises(ParameterError):
            Polya(b=0.0, r=1.0, A=1.0)
        with pytest.raises(ParameterError):
            Polya(b=1.0, r=1.0, A=0.0)  # A = 0 is the Bernoulli variant
        Polya(b=0.5, r=2.25, A=1.75)  # real-valued parameters are fine

    def test_initial_and_repeat_probs(self):
        assert initial_forward_prob(Bernoulli(0.3)) == 0.3
        assert initial_forward_prob(Polya(2, 3, 2)) == pytest.approx(0.4)
        assert repeat_forward_prob(Bernoulli(0.3)) == 0.3
        assert repeat_forward_prob(Polya(1, 1, 1)) == pytest.approx(2.0 / 3.0)


class TestNextSuccessProb:
    def test_bernoulli_ignores_history(self):
        scheme = Bernoulli(0.3)
        for n, s in ((0, 0), (5, 2), (9, 9)):
            assert next_success_prob(TrialState(scheme, n, s)) == 0.3

    def test_polya_reinforced(self):
        state = TrialState(Polya(1, 1, 1), n_trials=1, n_successes=1)
        assert next_success_prob(state) == pytest.approx(2.0 / 3.0)

    def test_polya_initial(self):
        assert next_success_prob(TrialState(Polya(2, 3, 2))) == pytest.approx(0.4)

    def test_state_invariant(self):
        with pytest.raises(ParameterError):
            TrialState(Bernoulli(0.5), n_trials=1, n_successes=2)


class TestSampleTrial:
    def test_degenerate_always_succeeds(self):
        state = TrialState(Bernoulli(1.0))
        for u in (0.0, 0.3, 0.999999):
            outcome, new_state = sample_trial(state, FixedU(u))
            assert outcome == 1
            assert new_state.n_trials == 1 and new_state.n_successes == 1

    def test_polya_inverse_cdf_threshold(self):
        scheme = Polya(1, 1, 1)  # first success prob = 1/2
        out_low, _ = sample_trial(TrialState(scheme), FixedU(0.499))
        out_high, _ = sample_trial(TrialState(scheme), FixedU(0.501))
        assert out_low == 1 and out_high == 0

    def test_polya_second_trial_mean(self):
        # P{X_2 = 1 | X_1 = 1} = 2/3 for b = r = A = 1
        rng = np.random.default_rng(20240601)
        scheme = Polya(1, 1, 1)
        n = 100_000
        hits = 0
        for u in rng.random(n):
            outcome, _ = sample_trial(
                TrialState(scheme, n_trials=1, n_successes=1), FixedU(u)
            )
            hits += outcome
        se = math.sqrt((2 / 3) * (1 / 3) / n)
        assert abs(hits / n - 2.0 / 3.0) <= 3.0 * se


class TestCountDist:
    def test_binomial(self):
        pmf = count_dist(Bernoulli(0.5), 3, Direction.FORWARD).pmf
        np.testing.assert_allclose(pmf, [0.25, 0.5, 0.25], atol=1e-15)

    def test_polya_two_trials(self):
        pmf = count_dist(Polya(1, 1, 1), 2, Direction.FORWARD).pmf
        np.testing.assert_allclose(pmf, [1.0 / 3.0, 2.0 / 3.0], rtol=1e-14)

    def test_single_trial_is_degenerate(self):
        for scheme in (Bernoulli(0.37), Polya(2, 3, 1.5)):
            for initial in Direction:
                pmf = count_dist(scheme, 1, initial).pmf
                np.testing.assert_allclose(pmf, [1.0], atol=0)

    def test_pmf_normalized(self):
        for scheme in (Bernoulli(0.37), Bernoulli(1.0), Polya(2, 3, 1.5)):
            for initial in Direction:
                for k in range(1, 13):
                    pmf = count_dist(scheme, k, initial).pmf
                    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
                    assert np.all(pmf >= 0.0)


class TestJointCountVelocity:
    def test_first_epoch_bernoulli(self):
        p = 0.42
        got = joint_count_velocity(Bernoulli(p), 1, 0, Direction.FORWARD, Direction.FORWARD)
        assert got == pytest.approx(p, rel=1e-15)

    def test_first_epoch_polya(self):
        b, r, A = 1.5, 2.0, 0.5
        got = joint_count_velocity(Polya(b, r, A), 1, 0, Direction.FORWARD, Direction.FORWARD)
        assert got == pytest.approx((b + A) / (b + r + A), rel=1e-14)

    def test_exhaustive_enumeration_small(self):
        table = enumerate_joint(Polya(1, 1, 1), 3, Direction.FORWARD)
        for j in range(3):
            for zi, zk in ((0, Direction.BACKWARD), (1, Direction.FORWARD)):
                got = joint_count_velocity(Polya(1, 1, 1), 3, j, Direction.FORWARD, zk)
                assert got == pytest.approx(table[j, zi], abs=1e-12)

    def test_enumeration_both_schemes_to_k10(self):
        for scheme in (Bernoulli(0.37), Polya(2.0, 3.0, 1.5)):
            for initial in Direction:
                for k in range(1, 11):
                    table = enumerate_joint(scheme, k, initial)
                    assert table.sum() == pytest.approx(1.0, abs=1e-12)
                    for j in range(k):
                        for zi, zk in ((0, Direction.BACKWARD), (1, Direction.FORWARD)):
                            got = joint_count_velocity(scheme, k, j, initial, zk)
                            assert abs(got - table[j, zi]) <= 1e-12

    def test_marginalization(self):
        for scheme in (Bernoulli(0.61), Polya(1.0, 2.0, 0.8)):
            for initial in Direction:
                for k in range(1, 13):
                    pmf = count_dist(scheme, k, initial).pmf
                    for j in range(k):
                        both = joint_count_velocity(
                            scheme, k, j, initial, Direction.FORWARD
                        ) + joint_count_velocity(scheme, k, j, initial, Direction.BACKWARD)
                        assert both == pytest.approx(pmf[j], abs=1e-12)

    def test_row_matches_scalar(self):
        scheme = Polya(1.0, 2.0, 0.8)
        for k in (1, 4, 9):
            for initial in Direction:
                for zk in Direction:
                    row = joint_count_velocity_row(scheme, k, initial, zk)
                    for j in range(k):
                        assert row[j] == pytest.approx(
                            joint_count_velocity(scheme, k, j, initial, zk), rel=1e-12
                        )

    def test_bernoulli_limit_of_polya(self):
        # A -> 0+ with b/(b+r) = p must approach the Bernoulli formulas
        p, A = 0.3, 1e-8
        polya = Polya(b=p, r=1.0 - p, A=A)
        bern = Bernoulli(p)
        for initial in Direction:
            for k in range(1, 7):
                for j in range(k):
                    for zk in Direction:
                        got = joint_count_velocity(polya, k, j, initial, zk)
                        want = joint_count_velocity(bern, k, j, initial, zk)
                        assert abs(got - want) <= 1e-5

    def test_exchangeability_witness(self):
        # enumeration of P{X_2 = 1 | X_1 = 1} equals (b+A)/(b+A+r)
        scheme = Polya(1.7, 0.9, 1.3)
        table = enumerate_joint(scheme, 1, Direction.FORWARD)
        assert table[0, 1] == pytest.approx(repeat_forward_prob(scheme), rel=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            joint_count_velocity(Bernoulli(0.5), 3, 3, Direction.FORWARD, Direction.FORWARD)
        with pytest.raises(ParameterError):
            joint_count_velocity(Bernoulli(0.5), 0, 0, Direction.FORWARD, Direction.FORWARD)
