"""Replay datasets: validated, in-memory score logs plus the JSONL file
format they travel in.

A log file is line-delimited JSON. The first line is a header declaring
the ordered arm names, context dimension (0 = no contexts), language pair
and domain. Every following line is one sentence record:

    {"sentence_id": str,
     "context": [d floats],            # required iff header dim > 0
     "scores": {arm: {"bleu"|"comet"|"cometkiwi": float, ...}, ...},
     "source": str, "reference": str,  # optional
     "hypotheses": {arm: str}}         # optional, all arms when present

Readers reject files violating the dataset invariants with line-numbered
messages rather than loading partial data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .reward import MetricScores, RecordedScoresProvider, RewardConfig, combine_reward

LOG_FORMAT_VERSION = 1


class LogValidationError(Exception):
    """Raised when a replay log violates the dataset invariants."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations[:5]) + ("..." if len(violations) > 5 else ""))


@dataclass
class ReplayRow:
    sentence_id: str
    scores: list[MetricScores]
    context: Optional[np.ndarray] = None
    source: Optional[str] = None
    reference: Optional[str] = None
    hypotheses: Optional[list[str]] = None


@dataclass
class ReplayDataset:
    """Per-sentence, per-arm precomputed scores standing in for live MT systems."""

    arms: list[str]
    rows: list[ReplayRow]
    dim: int = 0
    language_pair: str = ""
    domain: str = ""
    extra_header: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.arms:
            raise ValueError("dataset needs at least one arm")
        if len(set(self.arms)) != len(self.arms):
            raise ValueError("arm names must be unique")
        seen: dict[str, int] = {}
        for i, row in enumerate(self.rows):
            if len(row.scores) != self.n_arms:
                raise ValueError(f"row {i} has {len(row.scores)} score entries, expected {self.n_arms}")
            if row.sentence_id in seen:
                raise ValueError(
                    f"duplicate sentence_id {row.sentence_id!r} in rows {seen[row.sentence_id]} and {i}"
                )
            seen[row.sentence_id] = i
            if self.dim > 0:
                if row.context is None:
                    raise ValueError(f"row {i} lacks a context but header dim is {self.dim}")
                if row.context.shape != (self.dim,):
                    raise ValueError(f"row {i} context has wrong length")
            elif row.context is not None:
                raise ValueError(f"row {i} carries a context but header dim is 0")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def has_contexts(self) -> bool:
        return self.dim > 0

    @property
    def has_texts(self) -> bool:
        return all(r.reference is not None and r.hypotheses is not None for r in self.rows)

    def scores_provider(self) -> RecordedScoresProvider:
        return RecordedScoresProvider(
            {r.sentence_id: r.scores for r in self.rows}, self.n_arms
        )

    def reward_matrix(self, config: RewardConfig) -> np.ndarray:
        """Combined reward of every (row, arm); fails if the mode's metrics are missing."""
        out = np.empty((len(self.rows), self.n_arms), dtype=np.float64)
        for i, row in enumerate(self.rows):
            for a, scores in enumerate(row.scores):
                try:
                    out[i, a] = combine_reward(scores, config)
                except ValueError as exc:
                    raise ValueError(
                        f"row {i} ({row.sentence_id!r}), arm {self.arms[a]!r}: {exc}"
                    ) from exc
        return out

    def to_jsonl(self, path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            header = {
                "version": LOG_FORMAT_VERSION,
                "arms": self.arms,
                "dim": self.dim,
                "language_pair": self.language_pair,
                "domain": self.domain,
            }
            header.update(self.extra_header)
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for row in self.rows:
                rec: dict = {"sentence_id": row.sentence_id}
                if row.context is not None:
                    rec["context"] = [float(v) for v in row.context]
                rec["scores"] = {
                    arm: {
                        k: v
                        for k, v in (
                            ("bleu", s.bleu),
                            ("comet", s.comet),
                            ("cometkiwi", s.cometkiwi),
                        )
                        if v is not None
                    }
                    for arm, s in zip(self.arms, row.scores)
                }
                if row.source is not None:
                    rec["source"] = row.source
                if row.reference is not None:
                    rec["reference"] = row.reference
                if row.hypotheses is not None:
                    rec["hypotheses"] = dict(zip(self.arms, row.hypotheses))
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "ReplayDataset":
        dataset, violations = _parse_jsonl(path)
        if violations:
            raise LogValidationError(violations)
        assert dataset is not None
        return dataset


def validate_log_file(path) -> list[str]:
    """All invariant violations in a log file; empty list means valid."""
    _, violations = _parse_jsonl(path)
    return violations


def _check_metric_entry(entry: dict, where: str, problems: list[str]) -> Optional[MetricScores]:
    known = {"bleu", "comet", "cometkiwi"}
    unknown = set(entry) - known
    if unknown:
        problems.append(f"{where}: unknown metric fields {sorted(unknown)}")
        return None
    values = {}
    for name in known:
        v = entry.get(name)
        if v is None:
            values[name] = None
            continue
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            problems.append(f"{where}: metric {name} is not a finite number")
            return None
        values[name] = float(v)
    if all(v is None for v in values.values()):
        problems.append(f"{where}: no metric present")
        return None
    bleu = values["bleu"]
    if bleu is not None and not 0.0 <= bleu <= 100.0:
        problems.append(f"{where}: bleu {bleu} outside [0, 100]")
        return None
    return MetricScores(**values)


def _parse_jsonl(path) -> tuple[Optional[ReplayDataset], list[str]]:
    path = Path(path)
    problems: list[str] = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        return None, [f"cannot read {path}: {exc}"]
    if not lines:
        return None, ["empty file: missing header record"]

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        return None, [f"line 1: header is not valid JSON ({exc.msg})"]
    if not isinstance(header, dict) or "arms" not in header:
        return None, ["line 1: header record must declare 'arms'"]
    arms = header.get("arms")
    if not isinstance(arms, list) or not arms or not all(isinstance(a, str) for a in arms):
        return None, ["line 1: 'arms' must be a non-empty list of strings"]
    if len(set(arms)) != len(arms):
        return None, ["line 1: arm names must be unique"]
    dim = header.get("dim", 0)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        return None, ["line 1: 'dim' must be a nonnegative integer"]
    reserved = {"version", "arms", "dim", "language_pair", "domain"}
    extra = {k: v for k, v in header.items() if k not in reserved}

    rows: list[ReplayRow] = []
    seen: dict[str, str] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        where = f"row {lineno - 1} (line {lineno})"
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            problems.append(f"{where}: not valid JSON ({exc.msg})")
            continue
        sid = rec.get("sentence_id")
        if not isinstance(sid, str) or not sid:
            problems.append(f"{where}: missing or empty sentence_id")
            continue
        if sid in seen:
            problems.append(
                f"{where}: duplicate sentence_id {sid!r} (first seen at {seen[sid]})"
            )
            continue
        seen[sid] = where

        context = None
        if dim > 0:
            ctx = rec.get("context")
            if not isinstance(ctx, list):
                problems.append(f"{where}: missing context array (header dim={dim})")
                continue
            if len(ctx) != dim:
                problems.append(f"{where}: context has length {len(ctx)}, expected {dim}")
                continue
            if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in ctx):
                problems.append(f"{where}: context has non-finite entries")
                continue
            context = np.asarray(ctx, dtype=np.float64)
        elif "context" in rec:
            problems.append(f"{where}: context present but header dim is 0")
            continue

        scores_map = rec.get("scores")
        if not isinstance(scores_map, dict):
            problems.append(f"{where}: missing scores map")
            continue
        if set(scores_map) != set(arms):
            problems.append(
                f"{where}: scores cover {sorted(scores_map)}, expected exactly {sorted(arms)}"
            )
            continue
        scores = []
        bad = False
        for arm in arms:
            entry = scores_map[arm]
            if not isinstance(entry, dict):
                problems.append(f"{where}: scores[{arm!r}] is not an object")
                bad = True
                break
            ms = _check_metric_entry(entry, f"{where}: scores[{arm!r}]", problems)
            if ms is None:
                bad = True
                break
            scores.append(ms)
        if bad:
            continue

        hypotheses = None
        if "hypotheses" in rec:
            hyp_map = rec["hypotheses"]
            if not isinstance(hyp_map, dict) or set(hyp_map) != set(arms):
                problems.append(f"{where}: hypotheses must map every arm to a string")
                continue
            hypotheses = [str(hyp_map[a]) for a in arms]

        rows.append(
            ReplayRow(
                sentence_id=sid,
                scores=scores,
                context=context,
                source=rec.get("source"),
                reference=rec.get("reference"),
                hypotheses=hypotheses,
            )
        )

    if not rows and not problems:
        problems.append("log contains a header but no sentence records")
    if problems:
        return None, problems
    dataset = ReplayDataset(
        arms=list(arms),
        rows=rows,
        dim=dim,
        language_pair=str(header.get("language_pair", "")),
        domain=str(header.get("domain", "")),
        extra_header=extra,
    )
    return dataset, []
