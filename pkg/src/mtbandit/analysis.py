"""Post-run analytics: regret curves, arm histograms, fixed-arm baselines,
corpus BLEU of the selected translations, and multi-seed aggregation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import RoundRecord
from .dataset import ReplayDataset
from .reward import RewardConfig, corpus_bleu, tokenize


def compute_regret(records: Sequence[RoundRecord]) -> np.ndarray:
    """Cumulative per-round-oracle regret curve.

    regret[t] = sum over s <= t of (max_a r_{s,a} - r_{s,chosen}).
    Synthetic records carry exact arm means; those are used when every
    record has them, otherwise the realized counterfactual rewards are.
    """
    if not records:
        return np.zeros(0, dtype=np.float64)
    use_expected = all(r.expected_per_arm is not None for r in records)
    increments = np.empty(len(records), dtype=np.float64)
    for i, rec in enumerate(records):
        table = rec.expected_per_arm if use_expected else rec.per_arm_rewards
        if table is None:
            raise ValueError(f"record t={rec.t} lacks per-arm rewards; regret is undefined")
        increments[i] = float(np.max(table) - table[rec.chosen])
    return np.cumsum(increments)


def best_fixed_arm(dataset: ReplayDataset, config: RewardConfig) -> tuple[int, float]:
    """The single arm with the highest mean combined reward over all rows."""
    if not dataset.rows:
        raise ValueError("dataset is empty")
    means = dataset.reward_matrix(config).mean(axis=0)
    best = int(np.argmax(means))
    return best, float(means[best])


def best_fixed_arm_from_records(records: Sequence[RoundRecord]) -> tuple[int, float]:
    """Fixed-arm baseline recovered from logged counterfactual rewards."""
    if not records:
        raise ValueError("no records")
    use_expected = all(r.expected_per_arm is not None for r in records)
    tables = []
    for rec in records:
        table = rec.expected_per_arm if use_expected else rec.per_arm_rewards
        if table is None:
            raise ValueError(f"record t={rec.t} lacks per-arm rewards")
        tables.append(table)
    means = np.mean(np.stack(tables), axis=0)
    best = int(np.argmax(means))
    return best, float(means[best])


def arm_histogram(records: Sequence[RoundRecord], n_arms: int) -> np.ndarray:
    counts = np.zeros(n_arms, dtype=np.int64)
    for rec in records:
        counts[rec.chosen] += 1
    return counts


def selected_corpus_bleu(
    records: Sequence[RoundRecord],
    dataset: ReplayDataset,
    tokenizer: str = "whitespace+punct",
) -> float:
    """Corpus BLEU of the chosen arms' translations on the test split.

    Scores a bandit trace the way a fixed system would be scored in an
    evaluation table: pool the chosen hypothesis of every test round
    against its reference.
    """
    if not dataset.has_texts:
        raise ValueError("dataset rows lack reference/hypothesis texts")
    by_id = {row.sentence_id: row for row in dataset.rows}
    pairs = []
    for rec in records:
        if rec.split != "test":
            continue
        row = by_id[rec.sentence_id]
        hyp = row.hypotheses[rec.chosen]
        pairs.append((tokenize(hyp, tokenizer), tokenize(row.reference, tokenizer)))
    if not pairs:
        raise ValueError("no test-flagged records to score")
    return corpus_bleu(pairs)


@dataclass
class RunReport:
    """Summary of one (policy, environment, seed) run, or a seed aggregate."""

    policy_kind: str
    config_digest: str
    rounds: int
    cumulative_reward: float
    cumulative_regret: float
    regret_curve: list[float]
    arm_histogram: list[float]
    seed: Optional[int] = None
    seeds_aggregated: int = 1
    best_fixed_arm: Optional[int] = None
    best_fixed_arm_reward: Optional[float] = None
    regret_vs_best_fixed: Optional[float] = None
    test_rounds: int = 0
    test_mean_reward: Optional[float] = None
    selected_corpus_bleu: Optional[float] = None
    dispersion: dict = field(default_factory=dict)

    def __post_init__(self):
        hist_total = sum(self.arm_histogram)
        if abs(hist_total - self.rounds) > 1e-9:
            raise ValueError(f"arm histogram sums to {hist_total}, expected {self.rounds}")
        if self.cumulative_regret < -1e-12:
            raise ValueError("cumulative regret cannot be negative")
        curve = np.asarray(self.regret_curve, dtype=np.float64)
        if curve.size and np.any(np.diff(curve) < -1e-12):
            raise ValueError("regret curve must be non-decreasing")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(**data)


def build_report(
    policy_kind: str,
    config_digest: str,
    seed: int,
    records: Sequence[RoundRecord],
    n_arms: int,
    dataset: Optional[ReplayDataset] = None,
    reward_config: Optional[RewardConfig] = None,
) -> RunReport:
    """Assemble the per-run report from a record list."""
    curve = compute_regret(records)
    hist = arm_histogram(records, n_arms)
    test_records = [r for r in records if r.split == "test"]
    report = RunReport(
        policy_kind=policy_kind,
        config_digest=config_digest,
        seed=seed,
        rounds=len(records),
        cumulative_reward=float(sum(r.reward for r in records)),
        cumulative_regret=float(curve[-1]) if curve.size else 0.0,
        regret_curve=[float(v) for v in curve],
        arm_histogram=[float(v) for v in hist],
        test_rounds=len(test_records),
        test_mean_reward=(
            float(np.mean([r.reward for r in test_records])) if test_records else None
        ),
    )
    if dataset is not None and reward_config is not None:
        best, best_reward = best_fixed_arm(dataset, reward_config)
        report.best_fixed_arm = best
        report.best_fixed_arm_reward = best_reward
        shortfall = 0.0
        for rec in records:
            shortfall += float(rec.per_arm_rewards[best] - rec.reward)
        report.regret_vs_best_fixed = shortfall
        if dataset.has_texts and test_records:
            report.selected_corpus_bleu = selected_corpus_bleu(
                records, dataset, reward_config.tokenizer
            )
    else:
        best, best_reward = best_fixed_arm_from_records(records)
        report.best_fixed_arm = best
        report.best_fixed_arm_reward = best_reward
    return report


_AGGREGATE_FIELDS = (
    "cumulative_reward",
    "cumulative_regret",
    "regret_vs_best_fixed",
    "test_mean_reward",
    "selected_corpus_bleu",
)


def _dispersion(values: list[float]) -> dict:
    n = len(values)
    mean = sum(values) / n
    if n > 1:
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    else:
        sd = 0.0
    return {"mean": mean, "sd": sd, "min": min(values), "max": max(values)}


def aggregate_seeds(reports: Sequence[RunReport]) -> RunReport:
    """Element-wise aggregation over per-seed reports sharing one config.

    Scalar metrics are averaged with sample (n-1) dispersion; the regret
    curve and arm histogram are averaged element-wise.
    """
    if not reports:
        raise ValueError("nothing to aggregate")
    digests = {r.config_digest for r in reports}
    if len(digests) != 1:
        raise ValueError(f"reports mix config digests: {sorted(digests)}")
    kinds = {r.policy_kind for r in reports}
    if len(kinds) != 1:
        raise ValueError(f"reports mix policy kinds: {sorted(kinds)}")
    first = reports[0]
    if any(r.rounds != first.rounds for r in reports):
        raise ValueError("reports have differing round counts")

    curve = np.mean(np.stack([np.asarray(r.regret_curve) for r in reports]), axis=0)
    hist = np.mean(np.stack([np.asarray(r.arm_histogram) for r in reports]), axis=0)
    dispersion = {}
    scalars: dict[str, Optional[float]] = {}
    for name in _AGGREGATE_FIELDS:
        values = [getattr(r, name) for r in reports]
        if any(v is None for v in values):
            scalars[name] = None
            continue
        stats = _dispersion([float(v) for v in values])
        dispersion[name] = stats
        scalars[name] = stats["mean"]

    best_counts = np.zeros(len(first.arm_histogram))
    for r in reports:
        if r.best_fixed_arm is not None:
            best_counts[r.best_fixed_arm] += 1
    best_arm = int(np.argmax(best_counts)) if best_counts.sum() else None
    best_rewards = [r.best_fixed_arm_reward for r in reports if r.best_fixed_arm_reward is not None]

    return RunReport(
        policy_kind=first.policy_kind,
        config_digest=first.config_digest,
        seed=None,
        seeds_aggregated=len(reports),
        rounds=first.rounds,
        cumulative_reward=float(scalars["cumulative_reward"]),
        cumulative_regret=float(scalars["cumulative_regret"]),
        regret_curve=[float(v) for v in curve],
        arm_histogram=[float(v) for v in hist],
        best_fixed_arm=best_arm,
        best_fixed_arm_reward=(
            float(np.mean(best_rewards)) if best_rewards else None
        ),
        regret_vs_best_fixed=scalars["regret_vs_best_fixed"],
        test_rounds=first.test_rounds,
        test_mean_reward=scalars["test_mean_reward"],
        selected_corpus_bleu=scalars["selected_corpus_bleu"],
        dispersion=dispersion,
    )
