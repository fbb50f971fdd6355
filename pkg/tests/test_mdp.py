import numpy as np
import pytest
from scipy import stats

import fedq
from fedq.errors import IndexOutOfRangeError, ParamOutOfRangeError
from tests.conftest import random_mdp


def two_state_mdp(p=(0.3, 0.7), noise=None):
    transition = np.array([[[p[0], p[1]]], [[0.0, 1.0]]])
    reward_mean = np.zeros((2, 1))
    return fedq.TabularMDP(transition, reward_mean, gamma=0.8, noise=noise or fedq.NoiseSpec())


class TestValidation:
    def test_noise_spec_rejects_negative(self):
        with pytest.raises(ParamOutOfRangeError):
            fedq.NoiseSpec(std=-0.1)
        with pytest.raises(ParamOutOfRangeError):
            fedq.NoiseSpec(clip=-0.1)

    def test_rows_must_sum_to_one(self):
        bad = np.array([[[0.5, 0.4]], [[0.0, 1.0]]])
        with pytest.raises(ParamOutOfRangeError):
            fedq.TabularMDP(bad, np.zeros((2, 1)), gamma=0.8)

    def test_rows_must_be_nonnegative(self):
        bad = np.array([[[1.2, -0.2]], [[0.0, 1.0]]])
        with pytest.raises(ParamOutOfRangeError):
            fedq.TabularMDP(bad, np.zeros((2, 1)), gamma=0.8)

    def test_reward_bounded_by_r_max(self):
        tr = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
        with pytest.raises(ParamOutOfRangeError):
            fedq.TabularMDP(tr, np.full((2, 1), 1.5), gamma=0.8, r_max=1.0)

    def test_tables_immutable(self):
        mdp = two_state_mdp()
        with pytest.raises(ValueError):
            mdp.transition[0, 0, 0] = 0.5
        with pytest.raises(ValueError):
            mdp.reward_mean[0, 0] = 2.0


class TestSampleNextState:
    def test_deterministic_kernel(self):
        mdp = fedq.build_gridworld(fedq.parse_map("G."), gamma=0.8)
        rng = fedq.RngStream(7).generator()
        for _ in range(20):
            assert fedq.sample_next_state(mdp, 1, 2, rng) == 0  # left into the goal

    def test_consumes_exactly_one_draw(self):
        mdp = two_state_mdp()
        stream = fedq.RngStream(3, (1, 2))
        raw = stream.generator().random(3)
        gen = stream.generator()
        fedq.sample_next_state(mdp, 0, 0, gen)
        # the next uniform the caller sees is the second of the raw stream
        assert gen.random() == raw[1]

    def test_bounds_check(self):
        mdp = two_state_mdp()
        with pytest.raises(IndexOutOfRangeError):
            fedq.sample_next_state(mdp, 0, 1, fedq.RngStream(0).generator())
        with pytest.raises(IndexOutOfRangeError):
            fedq.sample_next_state(mdp, 2, 0, fedq.RngStream(0).generator())

    def test_monte_carlo_frequency_matches_kernel(self):
        # empirical frequency of s'=1 under P = [0.3, 0.7]
        mdp = two_state_mdp()
        gen = fedq.RngStream(42).generator()
        n = 100_000
        hits = sum(fedq.sample_next_state(mdp, 0, 0, gen) for _ in range(n))
        freq = hits / n
        assert abs(freq - 0.7) <= 3.0 * np.sqrt(0.21 / n)


class _StubRng:
    """Deterministic stand-in exposing the generator methods sampling uses."""

    def __init__(self, normal_value):
        self._normal = normal_value

    def normal(self, loc, scale, size=None):
        if size is None:
            return self._normal
        return np.full(size, self._normal)

    def random(self, size=None):
        return np.zeros(size) if size is not None else 0.0


class TestSampleReward:
    def test_zero_std_is_exact(self):
        mdp = fedq.build_gridworld(fedq.parse_map("G."), gamma=0.8)
        assert fedq.sample_reward(mdp, 1, 2, fedq.RngStream(0).generator()) == 1.0

    def test_large_draw_clips_at_threshold(self):
        grid = fedq.parse_map("G.")
        mdp = fedq.build_gridworld(grid, noise=fedq.NoiseSpec(std=0.5, clip=0.5), gamma=0.8)
        assert fedq.sample_reward(mdp, 1, 2, _StubRng(0.9)) == 1.0 + 0.5
        assert fedq.sample_reward(mdp, 1, 2, _StubRng(-3.0)) == 1.0 - 0.5

    def test_samples_stay_in_clip_band_and_mean_is_unbiased(self):
        noise = fedq.NoiseSpec(std=0.5, clip=0.5)
        mdp = fedq.build_gridworld(fedq.parse_map("G."), noise=noise, gamma=0.8)
        gen = fedq.RngStream(11).generator()
        n = 100_000
        draws = np.array([fedq.sample_reward(mdp, 1, 2, gen) for _ in range(n)])
        assert np.all(np.abs(draws - 1.0) <= noise.clip)
        # clipping is symmetric about 0 so the clipped noise has mean 0
        assert abs(draws.mean() - 1.0) <= 3.0 * noise.std / np.sqrt(n)


class TestSynchronousSample:
    def test_shapes_and_dtype(self, map5x5_noisy):
        ns, rw = fedq.synchronous_sample(map5x5_noisy, fedq.RngStream(0).generator())
        assert ns.shape == rw.shape == (25, 4)
        assert np.issubdtype(ns.dtype, np.integer)

    def test_degenerate_randomness(self, map5x5_mdp):
        ns, rw = fedq.synchronous_sample(map5x5_mdp, fedq.RngStream(5).generator())
        assert np.array_equal(ns, np.argmax(map5x5_mdp.transition, axis=2))
        assert np.array_equal(rw, map5x5_mdp.reward_mean)

    def test_identical_stream_identical_tables(self, map5x5_noisy):
        stream = fedq.RngStream(9, (4, 4, 4))
        ns1, rw1 = fedq.synchronous_sample(map5x5_noisy, stream)
        ns2, rw2 = fedq.synchronous_sample(map5x5_noisy, stream)
        assert np.array_equal(ns1, ns2)
        assert np.array_equal(rw1, rw2)

    def test_rewards_in_band(self):
        rng = np.random.default_rng(1)
        noise = fedq.NoiseSpec(std=1.0, clip=0.25)
        mdp = random_mdp(rng, noise=noise)
        for trial in range(50):
            _, rw = fedq.synchronous_sample(mdp, fedq.RngStream(1, (trial,)).generator())
            assert np.all(np.abs(rw - mdp.reward_mean) <= noise.clip)

    def test_stochastic_rows_follow_kernel(self):
        rng = np.random.default_rng(2)
        mdp = random_mdp(rng, n_states=3, n_actions=2)
        gen = fedq.RngStream(8).generator()
        counts = np.zeros((3, 2, 3))
        n = 20_000
        for _ in range(n):
            ns, _ = fedq.synchronous_sample(mdp, gen)
            for s in range(3):
                for a in range(2):
                    counts[s, a, ns[s, a]] += 1
        freq = counts / n
        se = np.sqrt(mdp.transition * (1 - mdp.transition) / n)
        assert np.all(np.abs(freq - mdp.transition) <= 4 * se + 1e-12)


class TestStreamIndependence:
    def test_chi_square_across_agent_streams(self):
        # joint next-state outcomes for two agents on a 2-state coin MDP
        mdp = two_state_mdp(p=(0.5, 0.5))
        n = 10_000
        cells = np.zeros((2, 2))
        root = fedq.RngStream(123)
        for t in range(n):
            a0 = fedq.sample_next_state(mdp, 0, 0, root.child(0, t).generator())
            a1 = fedq.sample_next_state(mdp, 0, 0, root.child(1, t).generator())
            cells[a0, a1] += 1
        statistic = float(((cells - n / 4) ** 2 / (n / 4)).sum())
        critical = stats.chi2.ppf(0.99, df=3)
        assert statistic < critical

    def test_distinct_paths_differ(self):
        a = fedq.RngStream(5, (0, 1)).generator().random(8)
        b = fedq.RngStream(5, (0, 2)).generator().random(8)
        assert not np.array_equal(a, b)

    def test_child_extends_path(self):
        root = fedq.RngStream(17)
        assert root.child(2, 3).path == (2, 3)
        assert root.child(2).child(3).path == (2, 3)
        direct = root.child(2, 3).generator().random(4)
        chained = root.child(2).child(3).generator().random(4)
        assert np.array_equal(direct, chained)
