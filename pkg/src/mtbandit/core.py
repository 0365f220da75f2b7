"""Shared domain types, the policy interface, and seeded randomness.

Every experiment is driven by a single 64-bit seed. All stochastic pieces
(tie-breaks, posterior draws, environment noise, shuffles) pull from
`RngStream` instances derived from that seed, so a (config, seed) pair
fully determines a run.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

RNG_ALGORITHM = "pcg64"


class RngStream:
    """Named, seedable random stream with explicit draw primitives.

    Wraps numpy's PCG64 generator. Identical seed + identical call
    sequence gives identical draws on every platform.
    """

    def __init__(self, seed: int):
        if not (0 <= int(seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        self.seed = int(seed)
        self.algorithm = RNG_ALGORITHM
        self._seed_seq = np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.PCG64(self._seed_seq))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._gen.integers(low, high))

    def uniform(self, size: Optional[int] = None):
        """Uniform float64 draw(s) in [0, 1)."""
        return self._gen.random(size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def beta(self, a: float, b: float) -> float:
        return float(self._gen.beta(a, b))

    def shuffled(self, items: Sequence[int]) -> list[int]:
        """Return a shuffled copy (the source sequence is untouched)."""
        out = list(items)
        self._gen.shuffle(out)
        return out

    def spawn(self, n: int) -> list["RngStream"]:
        """Derive n independent child streams deterministically.

        Spawning advances the parent's spawn counter, so successive spawn
        calls (and nested spawns from children) never collide.
        """
        out = []
        for child in self._seed_seq.spawn(n):
            stream = RngStream(self.seed)
            stream._seed_seq = child
            stream._gen = np.random.Generator(np.random.PCG64(child))
            out.append(stream)
        return out

    def get_state(self) -> dict:
        return copy.deepcopy(self._gen.bit_generator.state)

    def set_state(self, state: dict) -> None:
        self._gen.bit_generator.state = copy.deepcopy(state)


def as_context(values, dim: Optional[int] = None) -> np.ndarray:
    """Validate and coerce a context vector to a float64 numpy array.

    Entries must be finite; when `dim` is given the length must match.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"context must be a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("context contains non-finite entries")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"context has dimension {x.shape[0]}, expected {dim}")
    return x


def check_arm(arm: int, n_arms: int) -> int:
    arm = int(arm)
    if not 0 <= arm < n_arms:
        raise ValueError(f"arm {arm} out of range [0, {n_arms})")
    return arm


def check_reward(reward: float) -> float:
    """Rewards are normalized to [0, 1]; anything else fails loudly."""
    r = float(reward)
    if not np.isfinite(r) or r < 0.0 or r > 1.0:
        raise ValueError(f"reward {reward!r} outside [0, 1]")
    return r


@dataclass
class RoundRecord:
    """One interaction round: what was shown, chosen, and earned.

    per_arm_rewards holds the realized reward of every arm (replay and
    synthetic worlds only); its chosen entry always equals `reward`.
    expected_per_arm holds noiseless arm means when the world knows them
    (synthetic only) and drives exact regret computation there.
    """

    t: int
    chosen: int
    reward: float
    context: Optional[np.ndarray] = None
    per_arm_rewards: Optional[np.ndarray] = None
    expected_per_arm: Optional[np.ndarray] = None
    split: Optional[str] = None  # "explore" | "test" for replay runs
    sentence_id: Optional[str] = None

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"round index must be 1-based, got {self.t}")
        check_reward(self.reward)
        if self.per_arm_rewards is not None:
            self.per_arm_rewards = np.asarray(self.per_arm_rewards, dtype=np.float64)
            got = self.per_arm_rewards[self.chosen]
            if abs(got - self.reward) > 1e-12:
                raise ValueError(
                    f"per_arm_rewards[{self.chosen}]={got} disagrees with reward={self.reward}"
                )
        if self.expected_per_arm is not None:
            self.expected_per_arm = np.asarray(self.expected_per_arm, dtype=np.float64)


class Policy:
    """Arm-selection policy contract.

    Selection and update are separate steps so replay environments can
    log counterfactual per-arm rewards in between. `select` never mutates
    sufficient statistics; only the rng it is handed advances.
    """

    kind: str = "abstract"
    is_contextual: bool = False

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError(f"need at least one arm, got {n_arms}")
        self.n_arms = int(n_arms)

    def select(self, rng: RngStream, context: Optional[np.ndarray] = None) -> int:
        raise NotImplementedError

    def update(self, arm: int, reward: float, context: Optional[np.ndarray] = None) -> None:
        raise NotImplementedError

    def snapshot(self) -> dict:
        """Serializable state; `restore_policy(snapshot())` round-trips exactly."""
        raise NotImplementedError

    def _argmax_tiebreak(self, scores, rng: RngStream) -> int:
        """Argmax with a uniform seeded draw among exact maximizers.

        Random tie-breaking avoids systematic low-index bias while staying
        reproducible under the run seed. The rng is consumed only on ties.
        """
        scores = np.asarray(scores, dtype=np.float64)
        best = np.max(scores)
        winners = np.flatnonzero(scores == best)
        if winners.size == 1:
            return int(winners[0])
        return int(winners[rng.integers(0, winners.size)])


_POLICY_REGISTRY: dict[str, type] = {}


def register_policy(cls):
    """Class decorator: make a policy restorable by its `kind` tag."""
    _POLICY_REGISTRY[cls.kind] = cls
    return cls


def restore_policy(snapshot: dict) -> Policy:
    """Rebuild a policy from `Policy.snapshot()` output."""
    kind = snapshot.get("policy_kind")
    if kind not in _POLICY_REGISTRY:
        raise ValueError(f"unknown policy_kind {kind!r} in snapshot")
    return _POLICY_REGISTRY[kind].from_snapshot(snapshot)
