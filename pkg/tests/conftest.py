"""Shared fixture builders for replay datasets."""

import numpy as np
import pytest

from mtbandit.core import RngStream
from mtbandit.dataset import ReplayDataset, ReplayRow
from mtbandit.reward import MetricScores


def make_dataset(
    reward_matrix,
    dim=0,
    arms=None,
    with_texts=False,
    context_seed=0,
    language_pair="en-xx",
    domain="unit-test",
):
    """Dataset whose combined reward (lambda=0.4, default normalization)
    equals reward_matrix[row, arm] exactly: bleu=100r, comet=r, kiwi=r."""
    reward_matrix = np.asarray(reward_matrix, dtype=np.float64)
    n_rows, n_arms = reward_matrix.shape
    if arms is None:
        arms = [f"sys-{chr(ord('a') + i)}" for i in range(n_arms)]
    rng = RngStream(context_seed)
    base = np.ones(dim) / np.sqrt(dim) if dim else None
    rows = []
    for i in range(n_rows):
        context = None
        if dim:
            g = base + 0.25 * rng.normal(size=dim)
            context = g / np.linalg.norm(g)
        scores = [
            MetricScores(bleu=100.0 * r, comet=float(r), cometkiwi=float(r))
            for r in reward_matrix[i]
        ]
        reference = None
        hypotheses = None
        if with_texts:
            reference = f"token{i} alpha beta gamma delta"
            hypotheses = [
                f"token{i} alpha beta gamma delta" if r > 0.5 else f"zz{i} yy xx ww vv"
                for r in reward_matrix[i]
            ]
        rows.append(
            ReplayRow(
                sentence_id=f"s{i:04d}",
                scores=scores,
                context=context,
                source=f"source sentence {i}" if with_texts else None,
                reference=reference,
                hypotheses=hypotheses,
            )
        )
    return ReplayDataset(
        arms=list(arms), rows=rows, dim=dim, language_pair=language_pair, domain=domain
    )


@pytest.fixture
def dominant_arm_dataset():
    """Arm 1 strictly dominates every row."""
    rng = RngStream(77)
    n = 100
    rewards = np.empty((n, 3))
    for i in range(n):
        jitter = 0.02 * rng.uniform(3)
        rewards[i] = np.array([0.55, 0.80, 0.35]) + jitter
    return make_dataset(rewards, dim=4)
