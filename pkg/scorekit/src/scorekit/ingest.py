"""The ingestion pipeline: text files in, validated replay log out.

Each source sentence is encoded into a context vector and every system's
hypothesis is scored (BLEU + reference-based quality when references
exist; reference-free quality always). Rows whose scoring fails are
skipped with a warning and listed in a sidecar report next to the log.
The finished log is checked against the replay engine's validator before
it is moved into place, so an emitted log always loads.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from mtbandit.dataset import validate_log_file

from .encoders import make_encoder
from .manifest import IngestionManifest, ManifestError
from .metrics import HeuristicQeScorer, bleu_sentence, make_scorer, tokenize

log = logging.getLogger("scorekit")

LOG_FORMAT_VERSION = 1


class IngestError(RuntimeError):
    """Pipeline failure that prevents emitting a valid log."""


@dataclass
class IngestReport:
    output: Path
    rows_written: int
    rows_skipped: list[dict] = field(default_factory=list)
    sidecar: Path | None = None


def ingest(manifest: IngestionManifest) -> IngestReport:
    sources, references, hyp_lines = manifest.read_lines()
    arms = manifest.arms
    encoder = make_encoder(manifest.encoder, unit_norm=manifest.unit_norm_contexts)
    qe_scorer = make_scorer(manifest.cometkiwi_model, reference_based=False)
    ref_scorer = None
    if not manifest.target_free:
        ref_scorer = make_scorer(manifest.comet_model, reference_based=True)

    contexts = encoder.encode_batch(sources)

    lines: list[str] = []
    header = {
        "version": LOG_FORMAT_VERSION,
        "arms": arms,
        "dim": encoder.dim,
        "language_pair": manifest.language_pair,
        "domain": manifest.domain,
        "encoder": encoder.name,
        "context_unit_norm": manifest.unit_norm_contexts,
        "tokenizer": manifest.tokenizer,
    }
    lines.append(json.dumps(header, sort_keys=True))

    skipped: list[dict] = []
    written = 0
    for i, source in enumerate(sources):
        try:
            record = _build_record(
                i, source, references, hyp_lines, arms, contexts[i],
                manifest, qe_scorer, ref_scorer,
            )
        except Exception as exc:  # per-row failure: skip, warn, report
            log.warning("row %d skipped: %s", i + 1, exc)
            skipped.append({"row": i + 1, "reason": str(exc)})
            continue
        lines.append(json.dumps(record, sort_keys=True))
        written += 1

    if written == 0:
        raise IngestError("every row failed scoring; no log written")

    tmp_path = manifest.output.with_suffix(manifest.output.suffix + ".tmp")
    tmp_path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    violations = validate_log_file(tmp_path)
    if violations:
        tmp_path.unlink()
        raise IngestError(
            "emitted log failed replay validation: " + "; ".join(violations[:3])
        )
    tmp_path.replace(manifest.output)

    sidecar = manifest.output.with_suffix(manifest.output.suffix + ".skipped.json")
    sidecar.write_text(
        json.dumps({"rows_skipped": skipped, "rows_written": written}, indent=2) + "\n",
        encoding="utf-8",
    )
    return IngestReport(
        output=manifest.output, rows_written=written, rows_skipped=skipped, sidecar=sidecar
    )


def _build_record(i, source, references, hyp_lines, arms, context, manifest, qe_scorer, ref_scorer):
    reference = references[i] if references is not None else None
    scores = {}
    hypotheses = {}
    for arm in arms:
        hypothesis = hyp_lines[arm][i]
        hypotheses[arm] = hypothesis
        entry = {}
        if reference is not None:
            hyp_tokens = tokenize(hypothesis, manifest.tokenizer)
            ref_tokens = tokenize(reference, manifest.tokenizer)
            if not ref_tokens:
                raise ValueError(f"reference line {i + 1} is empty")
            entry["bleu"] = bleu_sentence(hyp_tokens, ref_tokens)
            entry["comet"] = ref_scorer.score(source, hypothesis, reference)
        entry["cometkiwi"] = qe_scorer.score(source, hypothesis, reference)
        scores[arm] = entry
    record = {
        "sentence_id": f"sent-{i + 1:06d}",
        "context": [float(v) for v in context],
        "scores": scores,
        "source": source,
        "hypotheses": hypotheses,
    }
    if reference is not None:
        record["reference"] = reference
    return record
