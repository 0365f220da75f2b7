"""Reward computation: sentence/corpus BLEU, metric normalization, and the
mixing of reference-based and reference-free quality scores into the [0,1]
scalar the policies consume.

Two reward modes exist. With references available the reward is
lambda * BLEU + (1 - lambda) * COMET over normalized metrics; without
references the reward is the normalized reference-free quality score.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

METRIC_NAMES = ("bleu", "comet", "cometkiwi")
TOKENIZER_MODES = ("whitespace", "whitespace+punct")


def tokenize(text: str, mode: str = "whitespace+punct") -> list[str]:
    """NFC-normalize and split into tokens.

    "whitespace" splits on unicode whitespace only; "whitespace+punct"
    additionally splits punctuation characters off as their own tokens.
    """
    if mode not in TOKENIZER_MODES:
        raise ValueError(f"unknown tokenizer mode {mode!r}; choose from {TOKENIZER_MODES}")
    text = unicodedata.normalize("NFC", text)
    chunks = text.split()
    if mode == "whitespace":
        return chunks
    tokens: list[str] = []
    for chunk in chunks:
        current = ""
        for ch in chunk:
            if unicodedata.category(ch).startswith("P"):
                if current:
                    tokens.append(current)
                    current = ""
                tokens.append(ch)
            else:
                current += ch
        if current:
            tokens.append(current)
    return tokens


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_stats(hypothesis, reference, n) -> tuple[int, int]:
    """(clipped match count, total hypothesis n-gram count) for one order."""
    hyp_counts = _ngram_counts(hypothesis, n)
    ref_counts = _ngram_counts(reference, n)
    clipped = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    return clipped, sum(hyp_counts.values())


def _geometric_score(precisions: Sequence[float], hyp_len: int, ref_len: int) -> float:
    weight = 1.0 / len(precisions)
    log_sum = sum(weight * math.log(p) for p in precisions)
    brevity = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return 100.0 * brevity * math.exp(log_sum)


def sentence_bleu(hypothesis: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """Smoothed sentence BLEU in [0, 100] over pre-tokenized sequences.

    Uniform 1/max_n weights, clipped n-gram counts, brevity penalty
    min(1, exp(1 - |ref|/|hyp|)). Zero precisions at orders n > 1 are
    exponentially smoothed: the k-th zero is replaced by 1/2^k. A zero
    unigram precision (or an empty hypothesis) scores 0.
    """
    if len(reference) == 0:
        raise ValueError("reference must be non-empty")
    if len(hypothesis) == 0:
        return 0.0
    precisions = []
    for n in range(1, max_n + 1):
        clipped, total = _clipped_stats(hypothesis, reference, n)
        precisions.append(clipped / total if total > 0 else 0.0)
    if precisions[0] == 0.0:
        return 0.0
    smoothed = []
    zeros = 0
    for p in precisions:
        if p == 0.0:
            zeros += 1
            p = 1.0 / 2.0**zeros
        smoothed.append(p)
    return _geometric_score(smoothed, len(hypothesis), len(reference))


def corpus_bleu(pairs: Sequence[tuple[Sequence[str], Sequence[str]]], max_n: int = 4) -> float:
    """Corpus BLEU: n-gram statistics pooled across segments, no smoothing.

    This is not an average of sentence scores; counts are summed over all
    (hypothesis, reference) pairs before precisions are formed.
    """
    if len(pairs) == 0:
        raise ValueError("corpus_bleu needs at least one pair")
    clipped = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hypothesis, reference in pairs:
        if len(reference) == 0:
            raise ValueError("reference must be non-empty")
        hyp_len += len(hypothesis)
        ref_len += len(reference)
        for n in range(1, max_n + 1):
            c, t = _clipped_stats(hypothesis, reference, n)
            clipped[n - 1] += c
            totals[n - 1] += t
    if hyp_len == 0:
        return 0.0
    precisions = [c / t if t > 0 else 0.0 for c, t in zip(clipped, totals)]
    if any(p == 0.0 for p in precisions):
        return 0.0
    return _geometric_score(precisions, hyp_len, ref_len)


@dataclass(frozen=True)
class MetricScores:
    """Raw per-sentence metric values for one arm; absent fields are None."""

    bleu: Optional[float] = None
    comet: Optional[float] = None
    cometkiwi: Optional[float] = None

    def __post_init__(self):
        if self.bleu is None and self.comet is None and self.cometkiwi is None:
            raise ValueError("at least one metric must be present")
        if self.bleu is not None and not 0.0 <= self.bleu <= 100.0:
            raise ValueError(f"bleu {self.bleu} outside [0, 100]")


@dataclass(frozen=True)
class AffineNorm:
    """Monotone affine map with a final clamp to [0, 1]."""

    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.scale < 0.0:
            raise ValueError(f"normalization scale must be nonnegative, got {self.scale}")

    def apply(self, value: float) -> float:
        return min(1.0, max(0.0, self.scale * value + self.offset))


def default_normalization() -> dict[str, AffineNorm]:
    # BLEU lives in [0,100]; the neural metrics already live essentially in [0,1].
    return {
        "bleu": AffineNorm(scale=0.01),
        "comet": AffineNorm(),
        "cometkiwi": AffineNorm(),
    }


@dataclass(frozen=True)
class RewardConfig:
    """Mixing weight, mode, and per-metric normalization for reward computation."""

    lam: float = 0.4
    mode: str = "reference_based"
    normalization: dict[str, AffineNorm] = field(default_factory=default_normalization)
    tokenizer: str = "whitespace+punct"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda {self.lam} outside [0, 1]")
        if self.mode not in ("reference_based", "target_free"):
            raise ValueError(f"unknown reward mode {self.mode!r}")
        if self.tokenizer not in TOKENIZER_MODES:
            raise ValueError(f"unknown tokenizer mode {self.tokenizer!r}")
        norm = dict(default_normalization())
        norm.update(self.normalization)
        object.__setattr__(self, "normalization", norm)


def combine_reward(scores: MetricScores, config: RewardConfig) -> float:
    """Collapse metric scores into the scalar reward in [0, 1]."""
    norm = config.normalization
    if config.mode == "target_free":
        if scores.cometkiwi is None:
            raise ValueError("target_free mode requires a cometkiwi score")
        return norm["cometkiwi"].apply(scores.cometkiwi)
    if scores.bleu is None or scores.comet is None:
        raise ValueError("reference_based mode requires both bleu and comet scores")
    return config.lam * norm["bleu"].apply(scores.bleu) + (1.0 - config.lam) * norm[
        "comet"
    ].apply(scores.comet)


class RecordedScoresProvider:
    """Per-(sentence, arm) metric scores backed by an in-memory table.

    Construction freezes the table, so repeated lookups are identical;
    replay environments are built on top of this.
    """

    def __init__(self, table: dict[str, list[MetricScores]], n_arms: int):
        self.n_arms = int(n_arms)
        for sid, row in table.items():
            if len(row) != self.n_arms:
                raise ValueError(
                    f"sentence {sid!r} has {len(row)} arm scores, expected {self.n_arms}"
                )
        self._table = dict(table)

    def get(self, sentence_id: str, arm: int) -> MetricScores:
        if sentence_id not in self._table:
            raise KeyError(f"unknown sentence_id {sentence_id!r}")
        row = self._table[sentence_id]
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range [0, {self.n_arms})")
        return row[arm]
