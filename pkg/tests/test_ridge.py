"""Online ridge statistics against the direct batch solve."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matching_bandits import (
    ValidationError,
    predict_mean,
    rank_arms,
    ridge_init,
    ridge_solve,
    ridge_update,
)

S1_THETA_0 = np.array([0.530, 0.848])
S1_MEANS = np.array([(0.667, 0.745), (0.745, 0.667), (0.994, 0.110)])


def batch_ridge(xs, ys, lam):
    """Independent oracle: solve (X^T X + lam I) theta = X^T y directly."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return np.linalg.solve(xs.T @ xs + lam * np.eye(xs.shape[1]), xs.T @ ys)


def fold(xs, ys, lam):
    state = ridge_init(xs.shape[1], lam)
    for x, y in zip(xs, ys):
        state = ridge_update(state, x, y)
    return state


class TestUpdate:
    def test_single_observation_arithmetic(self):
        state = ridge_update(ridge_init(2, 1.0), (1.0, 0.0), 1.0)
        assert np.array_equal(state.gram, [[2.0, 0.0], [0.0, 1.0]])
        assert np.array_equal(state.xty, [1.0, 0.0])
        assert state.n_obs == 1

    def test_zero_context_only_counts(self):
        before = ridge_update(ridge_init(3, 0.5), (1.0, 2.0, 3.0), 1.0)
        after = ridge_update(before, (0.0, 0.0, 0.0), 5.0)
        assert np.array_equal(after.gram, before.gram)
        assert np.array_equal(after.xty, before.xty)
        assert after.n_obs == before.n_obs + 1

    def test_updates_commute(self):
        # dyadic values keep every product and sum exact
        a, ya = np.array([0.5, -1.25]), 0.75
        b, yb = np.array([1.5, 0.25]), -0.5
        s0 = ridge_init(2, 0.5)
        one = ridge_update(ridge_update(s0, a, ya), b, yb)
        two = ridge_update(ridge_update(s0, b, yb), a, ya)
        assert np.array_equal(one.gram, two.gram)
        assert np.array_equal(one.xty, two.xty)

    def test_updates_commute_generic_values(self):
        rng = np.random.default_rng(21)
        a, b = rng.normal(size=2 * 3).reshape(2, 3)
        ya, yb = rng.normal(size=2)
        s0 = ridge_init(3, 0.1)
        one = ridge_update(ridge_update(s0, a, ya), b, yb)
        two = ridge_update(ridge_update(s0, b, yb), a, ya)
        assert np.allclose(one.gram, two.gram, rtol=1e-14, atol=0)
        assert np.allclose(one.xty, two.xty, rtol=1e-14, atol=1e-16)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            ridge_update(ridge_init(2, 1.0), (1.0, 2.0, 3.0), 0.0)


class TestSolve:
    def test_zero_observations(self):
        assert np.array_equal(ridge_solve(ridge_init(4, 2.0)), np.zeros(4))

    def test_hand_solved_single_sample(self):
        state = ridge_update(ridge_init(2, 1.0), (1.0, 0.0), 1.0)
        assert np.allclose(ridge_solve(state), [0.5, 0.0], rtol=0, atol=1e-15)

    def test_matches_batch_oracle(self):
        rng = np.random.default_rng(5)
        xs = rng.normal(size=(50, 4))
        ys = rng.normal(size=50)
        theta = ridge_solve(fold(xs, ys, 0.3))
        expected = batch_ridge(xs, ys, 0.3)
        assert np.linalg.norm(theta - expected) <= 1e-10 * np.linalg.norm(expected)

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        dim=st.integers(1, 8),
        n=st.integers(0, 60),
        lam=st.floats(1e-3, 10.0),
    )
    def test_incremental_equals_batch(self, seed, dim, n, lam):
        rng = np.random.default_rng(seed)
        xs = rng.normal(size=(n, dim))
        ys = rng.normal(size=n)
        theta = ridge_solve(fold(xs, ys, lam))
        expected = batch_ridge(xs, ys, lam)
        scale = max(1.0, np.linalg.norm(expected))
        assert np.linalg.norm(theta - expected) <= 1e-10 * scale


class TestPredict:
    def test_zero_estimate(self):
        assert predict_mean(np.zeros(3), np.array([4.0, 5.0, 6.0])) == 0.0

    def test_plain_inner_product(self):
        # <(1,1), (0.2,0.8)> is 1.0 by arithmetic
        assert predict_mean((1.0, 1.0), (0.2, 0.8)) == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_contexts_tie(self):
        est = (1.0, 1.0)
        assert predict_mean(est, (0.2, 0.8)) == predict_mean(est, (0.8, 0.2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            predict_mean((1.0, 2.0), (1.0, 2.0, 3.0))


class TestRankArms:
    def test_monotone_first_coordinate(self):
        contexts = np.array([(0.9, 0.1), (0.5, 0.5), (0.1, 0.9)])
        assert rank_arms((1.0, 0.0), contexts) == (0, 1, 2)

    def test_tie_breaks_to_lower_index(self):
        contexts = np.array([(0.5, 0.5), (0.5, 0.5), (0.9, 0.0)])
        assert rank_arms((0.0, 1.0), contexts) == (0, 1, 2)

    def test_true_parameter_ranks_first_arm_top(self):
        scores = S1_MEANS @ S1_THETA_0  # independent evaluation of the dots
        assert scores[0] == max(scores)
        assert rank_arms(S1_THETA_0, S1_MEANS)[0] == 0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.integers(1, 8), scale=st.floats(0.1, 100.0))
    def test_permutation_and_rescale_invariance(self, seed, k, scale):
        rng = np.random.default_rng(seed)
        est = rng.normal(size=3)
        contexts = rng.normal(size=(k, 3))
        ranking = rank_arms(est, contexts)
        assert sorted(ranking) == list(range(k))
        assert rank_arms(scale * est, contexts) == ranking
