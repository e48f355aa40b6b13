"""Context generation, score noise, and the random-stream layout."""

import numpy as np
import pytest

from matching_bandits import ValidationError, make_lower_bound_instance, mean_score, sample_context, sample_score
from matching_bandits.environment import (
    ANGULAR_DRIFT_MEAN,
    FIXED_GAUSSIAN_MEAN,
    UNIFORM_IID,
    AgentParams,
    ContextProcess,
    NoiseModel,
    context_rng,
    draw_contexts,
    draw_score_noise,
    noise_rng,
    sample_context_block,
)
from matching_bandits.scenarios import S1_MEANS, S1_THETAS

S1_PROCESS = ContextProcess(
    kind=FIXED_GAUSSIAN_MEAN, n_arms=3, dim=2, means=np.array(S1_MEANS), zeta=0.0
)


class TestAgentParams:
    def test_positive_weights_enforced(self):
        with pytest.raises(ValidationError):
            AgentParams(thetas=np.array([[0.5, 0.0]]), positive_weights=True)
        AgentParams(thetas=np.array([[0.5, 0.1]]), positive_weights=True)

    def test_unit_norm_enforced(self):
        with pytest.raises(ValidationError):
            AgentParams(thetas=np.array([[0.5, 0.5]]), unit_norm=True)
        AgentParams(thetas=np.array([[0.6, 0.8]]), unit_norm=True)


class TestSampleContext:
    def test_zero_noise_returns_stored_mean_exactly(self):
        rng = np.random.default_rng(0)
        out = sample_context(S1_PROCESS, arm=2, t=1, rng=rng)
        assert np.array_equal(out, np.array([0.994, 0.110]))

    def test_normalized_output_has_unit_norm(self):
        proc = ContextProcess(
            kind=FIXED_GAUSSIAN_MEAN,
            n_arms=3,
            dim=2,
            means=np.array(S1_MEANS),
            zeta=0.05,
            normalize=True,
        )
        rng = np.random.default_rng(1)
        for t in range(1, 50):
            out = sample_context(proc, arm=t % 3, t=t, rng=rng)
            assert abs(np.linalg.norm(out) - 1.0) <= 1e-9

    def test_uniform_coordinate_means(self):
        proc = ContextProcess(kind=UNIFORM_IID, n_arms=1, dim=3)
        block = sample_context_block(proc, 0, 100_000, np.random.default_rng(2))
        means = block.mean(axis=0)
        assert np.all(means > 0.49) and np.all(means < 0.51)

    def test_drift_shifts_first_coordinate_of_drift_arm_only(self):
        proc = ContextProcess(
            kind=ANGULAR_DRIFT_MEAN,
            n_arms=3,
            dim=2,
            means=np.array(S1_MEANS),
            zeta=0.0,
            drift_rate=0.005,
            drift_arm=0,
        )
        rng = np.random.default_rng(3)
        t = 40
        drifted = sample_context(proc, 0, t, rng)
        assert drifted == pytest.approx([0.667 + 0.005 * t, 0.745])
        assert np.array_equal(sample_context(proc, 1, t, rng), np.array(S1_MEANS[1]))

    def test_block_matches_pointwise_draws(self):
        proc = ContextProcess(
            kind=FIXED_GAUSSIAN_MEAN,
            n_arms=3,
            dim=2,
            means=np.array(S1_MEANS),
            zeta=0.01,
            normalize=True,
        )
        block = sample_context_block(proc, 1, 25, np.random.default_rng(9))
        rng = np.random.default_rng(9)
        pointwise = np.array([sample_context(proc, 1, t, rng) for t in range(1, 26)])
        assert np.array_equal(block, pointwise)

    def test_rounds_are_one_based(self):
        with pytest.raises(ValidationError):
            sample_context(S1_PROCESS, 0, 0, np.random.default_rng(0))


class TestScores:
    def test_s1_mean_score_value(self):
        params = AgentParams(thetas=np.array(S1_THETAS))
        # oracle: plain sum of products
        expected = 0.530 * 0.667 + 0.848 * 0.745
        assert mean_score(params, 0, np.array([0.667, 0.745])) == pytest.approx(
            expected, abs=1e-15
        )

    def test_zero_context(self):
        params = AgentParams(thetas=np.array(S1_THETAS))
        assert mean_score(params, 1, np.zeros(2)) == 0.0

    def test_linearity_in_context(self):
        params = AgentParams(thetas=np.array(S1_THETAS))
        x = np.array([0.3, 0.4])
        assert mean_score(params, 0, 2.5 * x) == pytest.approx(
            2.5 * mean_score(params, 0, x), rel=1e-15
        )

    def test_noiseless_score_is_exact(self):
        rng = np.random.default_rng(4)
        assert sample_score(0.37, NoiseModel(sigma=0.0), rng) == 0.37

    def test_noise_standard_deviation(self):
        rng = np.random.default_rng(5)
        draws = np.array(
            [sample_score(0.0, NoiseModel(sigma=0.05), rng) for _ in range(100_000)]
        )
        assert 0.049 <= draws.std() <= 0.051

    def test_equal_seeds_equal_draws(self):
        a = [sample_score(0.0, NoiseModel(0.1), np.random.default_rng(6)) for _ in range(1)]
        b = [sample_score(0.0, NoiseModel(0.1), np.random.default_rng(6)) for _ in range(1)]
        assert a == b


class TestStreams:
    def test_context_trace_is_function_of_seed_and_replication(self):
        one = draw_contexts(S1_PROCESS, 10, master_seed=42, replication=3)
        two = draw_contexts(S1_PROCESS, 10, master_seed=42, replication=3)
        assert np.array_equal(one, two)

    def test_replications_are_independent_streams(self):
        noisy = ContextProcess(
            kind=FIXED_GAUSSIAN_MEAN, n_arms=3, dim=2, means=np.array(S1_MEANS), zeta=0.01
        )
        r0 = draw_contexts(noisy, 10, master_seed=42, replication=0)
        r1 = draw_contexts(noisy, 10, master_seed=42, replication=1)
        # adding replication 1 does not change replication 0's draw
        again = draw_contexts(noisy, 10, master_seed=42, replication=0)
        assert np.array_equal(r0, again)
        assert not np.array_equal(r0, r1)

    def test_context_and_noise_streams_differ(self):
        a = context_rng(7, 0, 0).standard_normal(4)
        b = noise_rng(7, 0, 0).standard_normal(4)
        assert not np.array_equal(a, b)

    def test_noise_table_shape_and_scale(self):
        table = draw_score_noise(NoiseModel(sigma=0.0), 3, 5, master_seed=1, replication=0)
        assert table.shape == (5, 3)
        assert np.all(table == 0.0)


class TestLowerBoundInstance:
    def test_degenerate_budget(self):
        params, process, noise = make_lower_bound_instance(3, 1)
        assert np.allclose(params.thetas, [[0, 1, 0], [0, 0, 1]])
        assert process.kind == UNIFORM_IID
        assert noise.sigma > 0

    def test_unit_norm_rows(self):
        for h_bar in (1, 4, 60, 313):
            params, _, _ = make_lower_bound_instance(5, h_bar)
            norms = np.linalg.norm(params.thetas, axis=1)
            assert np.all(np.abs(norms - 1.0) <= 1e-12)

    def test_h_bar_four_values(self):
        params, _, _ = make_lower_bound_instance(3, 4)
        assert params.thetas[0] == pytest.approx([np.sqrt(0.75), 0.5, 0.0], abs=1e-15)
        assert params.thetas[1] == pytest.approx([np.sqrt(0.75), 0.0, 0.5], abs=1e-15)

    def test_dimension_guard(self):
        with pytest.raises(ValidationError):
            make_lower_bound_instance(2, 10)
