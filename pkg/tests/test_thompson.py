"""Thompson Sampling: fractional Beta bookkeeping and posterior draws."""

import numpy as np
import pytest

from mtbandit.core import RngStream
from mtbandit.policies import ThompsonPolicy


class TestUpdate:
    def test_full_reward(self):
        policy = ThompsonPolicy(2)
        policy.update(0, 1.0)
        assert policy.alphas[0] == 1.0 and policy.betas[0] == 0.0

    def test_zero_reward(self):
        policy = ThompsonPolicy(2)
        policy.update(0, 0.0)
        assert policy.alphas[0] == 0.0 and policy.betas[0] == 1.0

    def test_fractional_reward(self):
        policy = ThompsonPolicy(1)
        policy.alphas[0] = 2.5
        policy.betas[0] = 1.5
        policy.update(0, 0.4)
        assert policy.alphas[0] == pytest.approx(2.9, abs=1e-12)
        assert policy.betas[0] == pytest.approx(2.1, abs=1e-12)

    def test_pseudo_counts_track_updates(self):
        rng = RngStream(4)
        policy = ThompsonPolicy(3)
        updates = [0, 0, 0]
        for _ in range(200):
            arm = rng.integers(0, 3)
            policy.update(arm, float(rng.uniform()))
            updates[arm] += 1
        for a in range(3):
            assert policy.alphas[a] + policy.betas[a] == pytest.approx(updates[a], abs=1e-9)


class TestSelect:
    def test_fresh_state_is_uniform(self):
        policy = ThompsonPolicy(4)
        rng = RngStream(12345)
        counts = np.zeros(4)
        n = 10_000
        for _ in range(n):
            counts[policy.select(rng)] += 1
        sigma = np.sqrt(0.25 * 0.75 / n)
        assert np.all(np.abs(counts / n - 0.25) <= 3 * sigma)

    def test_dominant_posterior_wins(self):
        policy = ThompsonPolicy(2)
        policy.alphas = np.array([1000.0, 0.0])
        policy.betas = np.array([0.0, 1000.0])
        rng = RngStream(77)
        wins = sum(policy.select(rng) == 0 for _ in range(1000))
        assert wins >= 999

    def test_single_arm_skips_sampling(self):
        policy = ThompsonPolicy(1)
        rng = RngStream(5)
        state = rng.get_state()
        assert policy.select(rng) == 0
        assert rng.get_state() == state

    def test_identical_posteriors_stay_uniform(self):
        policy = ThompsonPolicy(3)
        policy.alphas = np.full(3, 6.0)
        policy.betas = np.full(3, 4.0)
        rng = RngStream(31)
        counts = np.zeros(3)
        n = 9_000
        for _ in range(n):
            counts[policy.select(rng)] += 1
        third = 1.0 / 3.0
        sigma = np.sqrt(third * (1 - third) / n)
        assert np.all(np.abs(counts / n - third) <= 4 * sigma)
