"""Cross-check a log's text/score consistency against the replay engine.

For a sample of rows, BLEU is recomputed twice from the stored texts:
once with scorekit's own scorer and once with the replay engine's native
one, under the same tokenization and smoothing. Divergences are reported,
never raised; a healthy pairing stays far below half a BLEU point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mtbandit.dataset import ReplayDataset
from mtbandit.reward import sentence_bleu as engine_bleu
from mtbandit.reward import tokenize as engine_tokenize

from .metrics import bleu_sentence as our_bleu
from .metrics import tokenize as our_tokenize


@dataclass
class VerifyReport:
    rows_checked: int
    comparisons: int
    max_divergence: float
    mean_divergence: float
    tokenizer: str
    worst: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows_checked": self.rows_checked,
            "comparisons": self.comparisons,
            "max_divergence": self.max_divergence,
            "mean_divergence": self.mean_divergence,
            "tokenizer": self.tokenizer,
            "worst": self.worst,
        }


def verify_against_engine(log_path, sample: int = 50) -> VerifyReport:
    """Recompute BLEU for up to `sample` rows and compare both scorers."""
    dataset = ReplayDataset.from_jsonl(log_path)
    tokenizer = str(dataset.extra_header.get("tokenizer", "whitespace+punct"))
    rows = [r for r in dataset.rows if r.reference is not None and r.hypotheses is not None]
    rows = rows[:sample]
    divergences: list[tuple[float, str, str]] = []
    for row in rows:
        for arm_idx, arm in enumerate(dataset.arms):
            hyp = row.hypotheses[arm_idx]
            ours = our_bleu(our_tokenize(hyp, tokenizer), our_tokenize(row.reference, tokenizer))
            engines = engine_bleu(
                engine_tokenize(hyp, tokenizer), engine_tokenize(row.reference, tokenizer)
            )
            divergences.append((abs(ours - engines), row.sentence_id, arm))
    if not divergences:
        return VerifyReport(0, 0, 0.0, 0.0, tokenizer)
    divergences.sort(reverse=True)
    values = [d for d, _, _ in divergences]
    return VerifyReport(
        rows_checked=len(rows),
        comparisons=len(values),
        max_divergence=max(values),
        mean_divergence=sum(values) / len(values),
        tokenizer=tokenizer,
        worst=[
            {"sentence_id": sid, "arm": arm, "divergence": d}
            for d, sid, arm in divergences[:5]
        ],
    )
