"""Quality metrics for ingestion.

BLEU here is scorekit's own implementation of the shared scoring contract
(clipped n-gram precisions, uniform weights, brevity penalty, exponential
smoothing of zero higher-order precisions). It is deliberately written
independently of the replay engine so the two sides can cross-check each
other during verification.

The neural reference-based / reference-free quality models are optional:
offline surrogate scorers (character-overlap F1 and a heuristic QE proxy)
keep the pipeline runnable without model downloads, and adapters for the
real models load lazily from their packages when requested.
"""

from __future__ import annotations

import math
import unicodedata


class MetricError(RuntimeError):
    """Scoring or model loading failure."""


def tokenize(text: str, mode: str = "whitespace+punct") -> list[str]:
    """NFC normalization, whitespace split, optional punctuation split."""
    text = unicodedata.normalize("NFC", text)
    pieces = text.split()
    if mode == "whitespace":
        return pieces
    if mode != "whitespace+punct":
        raise MetricError(f"unknown tokenizer mode {mode!r}")
    out: list[str] = []
    for piece in pieces:
        word: list[str] = []
        for ch in piece:
            if unicodedata.category(ch)[0] == "P":
                if word:
                    out.append("".join(word))
                    word = []
                out.append(ch)
            else:
                word.append(ch)
        if word:
            out.append("".join(word))
    return out


def _ngram_table(tokens: list[str], n: int) -> dict[tuple, int]:
    table: dict[tuple, int] = {}
    for start in range(len(tokens) - n + 1):
        gram = tuple(tokens[start : start + n])
        table[gram] = table.get(gram, 0) + 1
    return table


def bleu_sentence(hypothesis: list[str], reference: list[str], max_n: int = 4) -> float:
    """Smoothed sentence BLEU in [0, 100] over token lists."""
    if not reference:
        raise MetricError("reference must be non-empty")
    if not hypothesis:
        return 0.0
    precisions: list[float] = []
    for n in range(1, max_n + 1):
        hyp_table = _ngram_table(hypothesis, n)
        ref_table = _ngram_table(reference, n)
        total = sum(hyp_table.values())
        if total == 0:
            precisions.append(0.0)
            continue
        matched = 0
        for gram, count in hyp_table.items():
            ref_count = ref_table.get(gram, 0)
            matched += count if count < ref_count else ref_count
        precisions.append(matched / total)
    if precisions[0] == 0.0:
        return 0.0
    zero_rank = 0
    log_total = 0.0
    for p in precisions:
        if p == 0.0:
            zero_rank += 1
            p = 2.0**-zero_rank
        log_total += math.log(p)
    geo = math.exp(log_total / max_n)
    ratio = len(reference) / len(hypothesis)
    brevity = 1.0 if ratio <= 1.0 else math.exp(1.0 - ratio)
    return 100.0 * brevity * geo


def _char_ngrams(text: str, n: int) -> dict[str, int]:
    stripped = " ".join(text.split())
    table: dict[str, int] = {}
    for i in range(len(stripped) - n + 1):
        gram = stripped[i : i + n]
        table[gram] = table.get(gram, 0) + 1
    return table


class LexicalOverlapScorer:
    """Reference-based surrogate: character n-gram F1 in [0, 1].

    An offline stand-in for a neural reference-based quality model; useful
    for plumbing and fixtures, not a research-grade metric.
    """

    name = "lexical-f1"
    needs_reference = True

    def __init__(self, max_n: int = 6):
        self.max_n = max_n

    def score(self, source: str, hypothesis: str, reference: str) -> float:
        hyp = unicodedata.normalize("NFC", hypothesis).lower()
        ref = unicodedata.normalize("NFC", reference).lower()
        if not hyp or not ref:
            return 0.0
        f_scores = []
        for n in range(1, self.max_n + 1):
            hyp_table = _char_ngrams(hyp, n)
            ref_table = _char_ngrams(ref, n)
            if not hyp_table or not ref_table:
                continue
            overlap = sum(min(c, ref_table.get(g, 0)) for g, c in hyp_table.items())
            precision = overlap / sum(hyp_table.values())
            recall = overlap / sum(ref_table.values())
            if precision + recall > 0:
                f_scores.append(2 * precision * recall / (precision + recall))
            else:
                f_scores.append(0.0)
        return sum(f_scores) / len(f_scores) if f_scores else 0.0


class HeuristicQeScorer:
    """Reference-free surrogate: fluency/adequacy proxy in [0, 1].

    Blends hypothesis/source length ratio with source-token carry-over; a
    deterministic offline stand-in for a neural quality-estimation model.
    """

    name = "heuristic-qe"
    needs_reference = False

    def score(self, source: str, hypothesis: str, reference: str | None = None) -> float:
        src = tokenize(source, "whitespace")
        hyp = tokenize(hypothesis, "whitespace")
        if not hyp or not src:
            return 0.0
        ratio = len(hyp) / len(src)
        length_term = math.exp(-abs(math.log(ratio))) if ratio > 0 else 0.0
        src_set = {t.lower() for t in src}
        carry = sum(1 for t in hyp if t.lower() in src_set) / len(hyp)
        # punctuation balance: wildly unpunctuated or over-punctuated output scores lower
        hyp_punct = sum(1 for t in tokenize(hypothesis) if unicodedata.category(t[0])[0] == "P")
        punct_term = math.exp(-abs(hyp_punct - len(hyp) * 0.12) / max(len(hyp), 1))
        return max(0.0, min(1.0, 0.5 * length_term + 0.3 * (1.0 - carry) + 0.2 * punct_term))


class NeuralCometScorer:
    """Adapter for real reference-based/reference-free quality models."""

    def __init__(self, model_id: str, needs_reference: bool):
        self.name = model_id
        self.needs_reference = needs_reference
        try:
            from comet import download_model, load_from_checkpoint
        except ImportError as exc:
            raise MetricError(
                f"model loading failure: the 'unbabel-comet' package is required for {model_id!r}"
            ) from exc
        try:
            self._model = load_from_checkpoint(download_model(model_id))
        except Exception as exc:
            raise MetricError(f"model loading failure: cannot load {model_id!r}: {exc}") from exc

    def score(self, source: str, hypothesis: str, reference: str | None = None) -> float:
        sample = {"src": source, "mt": hypothesis}
        if self.needs_reference:
            sample["ref"] = reference or ""
        out = self._model.predict([sample], progress_bar=False)
        return float(out.scores[0])


def make_scorer(identifier: str, reference_based: bool):
    """Build a quality scorer from its manifest identifier."""
    ident = identifier.strip()
    if ident == LexicalOverlapScorer.name:
        if not reference_based:
            raise MetricError(f"{ident!r} is reference-based; use a QE scorer here")
        return LexicalOverlapScorer()
    if ident == HeuristicQeScorer.name:
        return HeuristicQeScorer()
    # anything else is treated as a real model checkpoint identifier
    return NeuralCometScorer(ident, needs_reference=reference_based)
