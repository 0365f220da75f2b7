"""The bandit policies: UCB, Thompson Sampling, and LinUCB.

The neural-feature variant lives in `neural.py`; it reuses the LinUCB head
defined here over learned latent features.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import linalg
from .core import (
    Policy,
    RngStream,
    as_context,
    check_arm,
    check_reward,
    register_policy,
)

SNAPSHOT_VERSION = 1


@register_policy
class UcbPolicy(Policy):
    """Upper Confidence Bound: optimism in the face of uncertainty.

    Index at round t:  mean_a + alpha * sqrt(log(t) / N_a)
    with natural log and t the number of completed rounds. Every arm is
    pulled once first, lowest index first, so N_a is never zero when the
    index is evaluated.
    """

    kind = "ucb"
    is_contextual = False

    def __init__(self, n_arms: int, alpha: float = 0.5):
        super().__init__(n_arms)
        if alpha < 0.0:
            raise ValueError(f"exploration coefficient must be nonnegative, got {alpha}")
        self.alpha = float(alpha)
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.means = np.zeros(n_arms, dtype=np.float64)
        self.t = 0

    def select(self, rng: RngStream, context=None) -> int:
        cold = np.flatnonzero(self.counts == 0)
        if cold.size > 0:
            return int(cold[0])
        log_t = np.log(max(self.t, 1))
        scores = self.means + self.alpha * np.sqrt(log_t / self.counts)
        return self._argmax_tiebreak(scores, rng)

    def update(self, arm: int, reward: float, context=None) -> None:
        arm = check_arm(arm, self.n_arms)
        r = check_reward(reward)
        self.counts[arm] += 1
        self.means[arm] += (r - self.means[arm]) / self.counts[arm]
        self.t += 1

    def snapshot(self) -> dict:
        return {
            "policy_kind": self.kind,
            "version": SNAPSHOT_VERSION,
            "state": {
                "n_arms": self.n_arms,
                "alpha": self.alpha,
                "counts": self.counts.tolist(),
                "means": self.means.tolist(),
                "t": self.t,
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "UcbPolicy":
        s = snap["state"]
        policy = cls(s["n_arms"], alpha=s["alpha"])
        policy.counts = np.asarray(s["counts"], dtype=np.int64)
        policy.means = np.asarray(s["means"], dtype=np.float64)
        policy.t = int(s["t"])
        return policy


@register_policy
class ThompsonPolicy(Policy):
    """Thompson Sampling with Beta posteriors and fractional updates.

    Bookkeeping starts at (0, 0) and accumulates alpha += r, beta += 1 - r,
    so alpha + beta counts the updates of that arm. Draws come from
    Beta(alpha + 1, beta + 1): the +1 Laplace offset makes every draw
    well-defined while leaving the update rule untouched.
    """

    kind = "thompson"
    is_contextual = False

    def __init__(self, n_arms: int):
        super().__init__(n_arms)
        self.alphas = np.zeros(n_arms, dtype=np.float64)
        self.betas = np.zeros(n_arms, dtype=np.float64)

    def select(self, rng: RngStream, context=None) -> int:
        if self.n_arms == 1:
            return 0
        draws = np.array(
            [rng.beta(self.alphas[a] + 1.0, self.betas[a] + 1.0) for a in range(self.n_arms)]
        )
        return self._argmax_tiebreak(draws, rng)

    def update(self, arm: int, reward: float, context=None) -> None:
        arm = check_arm(arm, self.n_arms)
        r = check_reward(reward)
        self.alphas[arm] += r
        self.betas[arm] += 1.0 - r

    def snapshot(self) -> dict:
        return {
            "policy_kind": self.kind,
            "version": SNAPSHOT_VERSION,
            "state": {
                "n_arms": self.n_arms,
                "alphas": self.alphas.tolist(),
                "betas": self.betas.tolist(),
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "ThompsonPolicy":
        s = snap["state"]
        policy = cls(s["n_arms"])
        policy.alphas = np.asarray(s["alphas"], dtype=np.float64)
        policy.betas = np.asarray(s["betas"], dtype=np.float64)
        return policy


@register_policy
class LinUcbPolicy(Policy):
    """Disjoint LinUCB: ridge regression per arm with elliptical bonuses.

    Score for arm a at context x:
        x . theta_a + alpha * sqrt(x^T A_a^-1 x)
    where A_a = ridge * I + sum of x x^T over rounds that pulled a, and
    theta_a = A_a^-1 b_a with b_a the reward-weighted context sum. A_a's
    inverse is maintained incrementally by rank-1 updates.
    """

    kind = "linucb"
    is_contextual = True

    def __init__(self, n_arms: int, dim: int, alpha: float = 1.5, ridge: float = 1.0):
        super().__init__(n_arms)
        if dim < 1:
            raise ValueError(f"context dimension must be >= 1, got {dim}")
        if alpha < 0.0:
            raise ValueError(f"exploration coefficient must be nonnegative, got {alpha}")
        if ridge <= 0.0:
            raise ValueError(f"ridge regularizer must be positive, got {ridge}")
        self.dim = int(dim)
        self.alpha = float(alpha)
        self.ridge = float(ridge)
        self.a_inv = [linalg.identity_inverse(dim, ridge) for _ in range(n_arms)]
        self.b = [np.zeros(dim, dtype=np.float64) for _ in range(n_arms)]
        self.theta = [np.zeros(dim, dtype=np.float64) for _ in range(n_arms)]
        self.t = 0

    def _require_context(self, context) -> np.ndarray:
        if context is None:
            raise ValueError(f"{self.kind} is contextual; select/update need a context vector")
        return as_context(context, self.dim)

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Selection index of every arm at context x (no rng, no mutation)."""
        out = np.empty(self.n_arms, dtype=np.float64)
        for a in range(self.n_arms):
            width = np.sqrt(linalg.quad_form(self.a_inv[a], x))
            out[a] = float(x @ self.theta[a]) + self.alpha * width
        return out

    def select(self, rng: RngStream, context=None) -> int:
        x = self._require_context(context)
        return self._argmax_tiebreak(self.scores(x), rng)

    def update(self, arm: int, reward: float, context=None) -> None:
        arm = check_arm(arm, self.n_arms)
        r = check_reward(reward)
        x = self._require_context(context)
        self.a_inv[arm] = linalg.rank1_inverse_update(self.a_inv[arm], x)
        self.b[arm] = self.b[arm] + r * x
        self.theta[arm] = self.a_inv[arm] @ self.b[arm]
        self.t += 1

    def snapshot(self) -> dict:
        return {
            "policy_kind": self.kind,
            "version": SNAPSHOT_VERSION,
            "state": {
                "n_arms": self.n_arms,
                "dim": self.dim,
                "alpha": self.alpha,
                "ridge": self.ridge,
                "a_inv": [m.tolist() for m in self.a_inv],
                "b": [v.tolist() for v in self.b],
                "theta": [v.tolist() for v in self.theta],
                "t": self.t,
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "LinUcbPolicy":
        s = snap["state"]
        policy = cls(s["n_arms"], s["dim"], alpha=s["alpha"], ridge=s["ridge"])
        policy.a_inv = [np.asarray(m, dtype=np.float64) for m in s["a_inv"]]
        policy.b = [np.asarray(v, dtype=np.float64) for v in s["b"]]
        policy.theta = [np.asarray(v, dtype=np.float64) for v in s["theta"]]
        policy.t = int(s["t"])
        return policy


def make_policy(kind: str, n_arms: int, dim: Optional[int] = None, **params) -> Policy:
    """Build a policy by kind name; contextual kinds require `dim`."""
    from .neural import NeuralLinUcbPolicy  # local import to avoid cycle

    kinds = {
        "ucb": UcbPolicy,
        "thompson": ThompsonPolicy,
        "linucb": LinUcbPolicy,
        "neural_linucb": NeuralLinUcbPolicy,
    }
    if kind not in kinds:
        raise ValueError(f"unknown policy kind {kind!r}; choose from {sorted(kinds)}")
    cls = kinds[kind]
    if cls.is_contextual:
        if dim is None:
            raise ValueError(f"policy {kind!r} is contextual and needs a context dimension")
        return cls(n_arms, dim, **params)
    return cls(n_arms, **params)
