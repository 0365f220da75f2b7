#!/usr/bin/env python3
"""Regenerate the shipped replay fixtures (deterministic).

Produces two 200-row, 3-arm logs with a known best arm:

  replay_fixture_200.jsonl            full scores (bleu + comet + cometkiwi)
                                      plus source/reference/hypothesis texts
  replay_fixture_200_targetfree.jsonl cometkiwi only, no references

Combined rewards (lambda=0.4, bleu/100, identity comet) have arm means of
exactly 0.88 / 0.83 / 0.55, i.e. a 0.05 margin between the best and
second-best system. BLEU fields are real sentence-BLEU values of the
stored hypothesis/reference token sequences; comet columns are shifted so
the means land exactly on target.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mtbandit.core import RngStream
from mtbandit.dataset import ReplayDataset, ReplayRow
from mtbandit.reward import MetricScores, sentence_bleu

N_ROWS = 200
DIM = 6
ARMS = ["helios-mt", "borealis-mt", "meridian-mt"]
TARGET_MEANS = [0.88, 0.83, 0.55]
CORRUPTION = [0.08, 0.16, 0.50]  # fraction of tokens replaced, fixed count per row
LAMBDA = 0.4

VOCAB = (
    "the a of to and in for with on at from by river market school water "
    "council trade harvest season road bridge elder story song field rain "
    "maize fish boat letter teacher child house door night morning news "
    "voice journey"
).split()
NOISE_VOCAB = [f"zz{i}" for i in range(40)]


def centered_noise(rng, n, half_width):
    u = rng.uniform(n) * 2.0 * half_width - half_width
    return u - u.mean()


def main(out_dir: Path) -> None:
    rng = RngStream(20240915)
    references = []
    hypotheses = [[] for _ in ARMS]
    bleus = np.zeros((N_ROWS, len(ARMS)))
    contexts = np.zeros((N_ROWS, DIM))
    base = np.ones(DIM) / np.sqrt(DIM)

    for i in range(N_ROWS):
        length = 12 + rng.integers(0, 5)
        ref = [VOCAB[rng.integers(0, len(VOCAB))] for _ in range(length)]
        references.append(ref)
        for a, rate in enumerate(CORRUPTION):
            # Deterministic corruption count keeps per-row BLEU spread narrow,
            # so arm quality differences dominate row-to-row noise.
            n_bad = max(1, round(rate * length))
            bad = set(rng.shuffled(range(length))[:n_bad])
            hyp = [
                NOISE_VOCAB[rng.integers(0, len(NOISE_VOCAB))] if t in bad else tok
                for t, tok in enumerate(ref)
            ]
            hypotheses[a].append(hyp)
            bleus[i, a] = sentence_bleu(hyp, ref)
        g = base + 0.15 * rng.normal(size=DIM)
        contexts[i] = g / np.linalg.norm(g)

    # Hit the target combined means exactly: the comet column absorbs the
    # gap left by the measured mean BLEU of each arm.
    comet = np.zeros_like(bleus)
    kiwi = np.zeros_like(bleus)
    for a, target in enumerate(TARGET_MEANS):
        mean_bleu_norm = bleus[:, a].mean() / 100.0
        comet_center = (target - LAMBDA * mean_bleu_norm) / (1.0 - LAMBDA)
        comet[:, a] = comet_center + centered_noise(rng, N_ROWS, 0.015)
        kiwi[:, a] = target + centered_noise(rng, N_ROWS, 0.015)
        if not (0.0 < comet[:, a].min() and comet[:, a].max() < 1.0):
            raise RuntimeError(f"comet column for arm {a} leaves (0, 1)")
        if not (0.0 < kiwi[:, a].min() and kiwi[:, a].max() < 1.0):
            raise RuntimeError(f"cometkiwi column for arm {a} leaves (0, 1)")

    full_rows = []
    free_rows = []
    for i in range(N_ROWS):
        sid = f"sent-{i:04d}"
        source = f"source sentence {i:04d}"
        ctx = contexts[i]
        full_rows.append(
            ReplayRow(
                sentence_id=sid,
                scores=[
                    MetricScores(
                        bleu=float(bleus[i, a]),
                        comet=float(comet[i, a]),
                        cometkiwi=float(kiwi[i, a]),
                    )
                    for a in range(len(ARMS))
                ],
                context=ctx,
                source=source,
                reference=" ".join(references[i]),
                hypotheses=[" ".join(hypotheses[a][i]) for a in range(len(ARMS))],
            )
        )
        free_rows.append(
            ReplayRow(
                sentence_id=sid,
                scores=[MetricScores(cometkiwi=float(kiwi[i, a])) for a in range(len(ARMS))],
                context=ctx,
                source=source,
                hypotheses=[" ".join(hypotheses[a][i]) for a in range(len(ARMS))],
            )
        )

    full = ReplayDataset(
        arms=ARMS, rows=full_rows, dim=DIM, language_pair="en-xx", domain="synthetic-news"
    )
    free = ReplayDataset(
        arms=ARMS, rows=free_rows, dim=DIM, language_pair="en-xx", domain="synthetic-news"
    )
    full.to_jsonl(out_dir / "replay_fixture_200.jsonl")
    free.to_jsonl(out_dir / "replay_fixture_200_targetfree.jsonl")

    from mtbandit.analysis import best_fixed_arm
    from mtbandit.reward import RewardConfig

    means = full.reward_matrix(RewardConfig(lam=LAMBDA)).mean(axis=0)
    print("combined means:", np.round(means, 6))
    print("best fixed arm:", best_fixed_arm(full, RewardConfig(lam=LAMBDA)))
    kiwi_means = free.reward_matrix(RewardConfig(mode="target_free")).mean(axis=0)
    print("target-free means:", np.round(kiwi_means, 6))


if __name__ == "__main__":
    main(Path(__file__).resolve().parent)
