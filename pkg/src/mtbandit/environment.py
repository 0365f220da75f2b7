"""Reward-generating worlds.

Two synthetic oracles (Bernoulli arms and linear-Gaussian contextual arms)
validate the policies against known ground truth; the replay environment
emulates the live selection pipeline from a precomputed score log. Every
world draws its per-round randomness before querying the policy, so two
policies run under the same seed face the identical sequence of contexts
and counterfactual rewards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Policy, RngStream, RoundRecord
from .dataset import ReplayDataset
from .reward import RewardConfig


@dataclass
class BernoulliSpec:
    """Context-free world: arm a pays 1 with probability means[a]."""

    means: list[float]
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.means:
            raise ValueError("need at least one arm")
        for p in self.means:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"bernoulli mean {p} outside [0, 1]")


@dataclass
class LinearGaussianSpec:
    """Contextual world: reward = clamp(x . theta_a + gaussian noise, 0, 1).

    Contexts are standard Gaussian draws rescaled to unit norm; an optional
    mean shift (applied before rescaling) biases them into a sphere cap so
    rewards can be kept away from the clamp boundaries.
    """

    thetas: list[np.ndarray]
    noise: float
    horizon: int
    context_mean: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.noise < 0.0:
            raise ValueError("noise must be nonnegative")
        self.thetas = [np.asarray(t, dtype=np.float64) for t in self.thetas]
        if not self.thetas:
            raise ValueError("need at least one arm")
        dims = {t.shape for t in self.thetas}
        if len(dims) != 1 or self.thetas[0].ndim != 1:
            raise ValueError("per-arm parameter vectors must share one dimension")
        if self.context_mean is not None:
            self.context_mean = np.asarray(self.context_mean, dtype=np.float64)
            if self.context_mean.shape != self.thetas[0].shape:
                raise ValueError("context_mean dimension mismatch")

    @property
    def dim(self) -> int:
        return self.thetas[0].shape[0]


class SyntheticEnvironment:
    """Runs a policy against a synthetic spec, recording exact ground truth.

    The run seed is split into a world stream and a policy stream, so the
    sequence of contexts and counterfactual rewards depends only on the
    seed: different policies on one seed face the identical world.
    """

    def __init__(self, spec):
        self.spec = spec
        self.clamped_rounds = 0  # linear world: rounds where any arm's reward was clipped

    def run(self, policy: Policy, rng: RngStream) -> list[RoundRecord]:
        world_rng, policy_rng = rng.spawn(2)
        if isinstance(self.spec, BernoulliSpec):
            return self._run_bernoulli(policy, world_rng, policy_rng)
        if isinstance(self.spec, LinearGaussianSpec):
            return self._run_linear(policy, world_rng, policy_rng)
        raise TypeError(f"unknown synthetic spec {type(self.spec).__name__}")

    def _run_bernoulli(self, policy: Policy, rng: RngStream, policy_rng: RngStream) -> list[RoundRecord]:
        spec = self.spec
        k = len(spec.means)
        if policy.n_arms != k:
            raise ValueError(f"policy has {policy.n_arms} arms, world has {k}")
        if policy.is_contextual:
            raise ValueError("contextual policy cannot run in a context-free world")
        means = np.asarray(spec.means, dtype=np.float64)
        records = []
        for t in range(1, spec.horizon + 1):
            outcomes = (rng.uniform(k) < means).astype(np.float64)
            arm = policy.select(policy_rng)
            reward = float(outcomes[arm])
            policy.update(arm, reward)
            records.append(
                RoundRecord(
                    t=t,
                    chosen=arm,
                    reward=reward,
                    per_arm_rewards=outcomes,
                    expected_per_arm=means.copy(),
                )
            )
        return records

    def _run_linear(self, policy: Policy, rng: RngStream, policy_rng: RngStream) -> list[RoundRecord]:
        spec = self.spec
        k = len(spec.thetas)
        if policy.n_arms != k:
            raise ValueError(f"policy has {policy.n_arms} arms, world has {k}")
        theta_mat = np.stack(spec.thetas)
        records = []
        self.clamped_rounds = 0
        for t in range(1, spec.horizon + 1):
            g = rng.normal(size=spec.dim)
            if spec.context_mean is not None:
                g = g + spec.context_mean
            x = g / np.linalg.norm(g)
            raw_means = theta_mat @ x
            noise = rng.normal(0.0, spec.noise, size=k) if spec.noise > 0 else np.zeros(k)
            raw = raw_means + noise
            rewards = np.clip(raw, 0.0, 1.0)
            if np.any(raw != rewards):
                self.clamped_rounds += 1
            expected = np.clip(raw_means, 0.0, 1.0)
            arm = policy.select(policy_rng, x)
            reward = float(rewards[arm])
            policy.update(arm, reward, x)
            records.append(
                RoundRecord(
                    t=t,
                    chosen=arm,
                    reward=reward,
                    context=x,
                    per_arm_rewards=rewards,
                    expected_per_arm=expected,
                )
            )
        return records


@dataclass
class ReplaySplit:
    """Row index pools for the explore and test phases.

    With no explicit sizes both phases draw on the full dataset (the small-
    fixture mode). With explore_rows=N the explore pool is the first N rows
    and the test pool the following test_rows (or remainder), mirroring the
    validation-then-test protocol.
    """

    explore_rows: Optional[int] = None
    test_rows: Optional[int] = None

    def pools(self, n_rows: int) -> tuple[list[int], list[int]]:
        if self.explore_rows is None:
            explore = list(range(n_rows))
            if self.test_rows is not None and self.test_rows != n_rows:
                raise ValueError("test_rows without explore_rows must match the dataset size")
            return explore, list(range(n_rows))
        if not 0 <= self.explore_rows <= n_rows:
            raise ValueError(f"explore_rows {self.explore_rows} outside [0, {n_rows}]")
        explore = list(range(self.explore_rows))
        remaining = n_rows - self.explore_rows
        test_n = remaining if self.test_rows is None else self.test_rows
        if test_n < 1 or self.explore_rows + test_n > n_rows:
            raise ValueError(
                f"test split of {test_n} rows does not fit after {self.explore_rows} explore rows"
            )
        test = list(range(self.explore_rows, self.explore_rows + test_n))
        return explore, test


class ReplayEnvironment:
    """Offline stand-in for the live pipeline, driven by a score log.

    Each step presents the next scheduled row's context, asks the policy
    for an arm, pays that arm's stored combined reward, updates the policy
    and logs all counterfactual arm rewards. The schedule is `passes`
    seeded shuffles of the explore pool followed by one seeded shuffle of
    the test pool; learning stays on during the test phase unless
    freeze_on_test is set.
    """

    def __init__(
        self,
        dataset: ReplayDataset,
        reward_config: RewardConfig,
        rng: RngStream,
        split: ReplaySplit = ReplaySplit(),
        passes: int = 1,
        freeze_on_test: bool = False,
    ):
        if passes < 0:
            raise ValueError("passes must be >= 0")
        self.dataset = dataset
        self.freeze_on_test = freeze_on_test
        self.rewards = dataset.reward_matrix(reward_config)
        # Separate streams: row order depends only on the seed, never on how
        # many draws the policy consumes while selecting.
        shuffle_rng, self._policy_rng = rng.spawn(2)
        explore_pool, test_pool = split.pools(len(dataset.rows))
        schedule: list[tuple[int, str]] = []
        for _ in range(passes):
            for i in shuffle_rng.shuffled(explore_pool):
                schedule.append((i, "explore"))
        for i in shuffle_rng.shuffled(test_pool):
            schedule.append((i, "test"))
        self._schedule = schedule
        self._cursor = 0

    @property
    def remaining(self) -> int:
        return len(self._schedule) - self._cursor

    def step(self, policy: Policy) -> RoundRecord:
        if self._cursor >= len(self._schedule):
            raise RuntimeError("dataset exhausted: no scheduled rows remain")
        if policy.n_arms != self.dataset.n_arms:
            raise ValueError(
                f"policy has {policy.n_arms} arms, log has {self.dataset.n_arms}"
            )
        if policy.is_contextual and not self.dataset.has_contexts:
            raise ValueError("contextual policy needs a log with context vectors")
        row_idx, phase = self._schedule[self._cursor]
        row = self.dataset.rows[row_idx]
        context = row.context if self.dataset.has_contexts else None
        arm = policy.select(self._policy_rng, context)
        per_arm = self.rewards[row_idx]
        reward = float(per_arm[arm])
        if not (phase == "test" and self.freeze_on_test):
            policy.update(arm, reward, context)
        self._cursor += 1
        return RoundRecord(
            t=self._cursor,
            chosen=arm,
            reward=reward,
            context=context,
            per_arm_rewards=per_arm.copy(),
            split=phase,
            sentence_id=row.sentence_id,
        )

    def run(self, policy: Policy) -> list[RoundRecord]:
        if policy.is_contextual and not self.dataset.has_contexts:
            raise ValueError("contextual policy needs a log with context vectors")
        return [self.step(policy) for _ in range(self.remaining)]
