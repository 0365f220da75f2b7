"""Ingestion manifests: what to score, with which models, into which log."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ManifestError(ValueError):
    """Invalid or inconsistent ingestion manifest."""


@dataclass
class IngestionManifest:
    """Input files and model identifiers for one ingestion run.

    A missing reference file switches the run to target-free mode: no BLEU
    and no reference-based quality score, only the reference-free one.
    """

    source: Path
    hypotheses: dict[str, Path]  # arm name -> line-aligned hypothesis file
    output: Path
    reference: Optional[Path] = None
    encoder: str = "hash@768"
    comet_model: str = "lexical-f1"
    cometkiwi_model: str = "heuristic-qe"
    language_pair: str = ""
    domain: str = ""
    unit_norm_contexts: bool = True
    tokenizer: str = "whitespace+punct"

    def __post_init__(self):
        if not self.hypotheses:
            raise ManifestError("hypotheses: at least one system file is required")
        self.source = Path(self.source)
        self.output = Path(self.output)
        if self.reference is not None:
            self.reference = Path(self.reference)
        self.hypotheses = {str(k): Path(v) for k, v in self.hypotheses.items()}
        if self.tokenizer not in ("whitespace", "whitespace+punct"):
            raise ManifestError(f"tokenizer: unknown mode {self.tokenizer!r}")

    @property
    def arms(self) -> list[str]:
        return list(self.hypotheses)

    @property
    def target_free(self) -> bool:
        return self.reference is None

    def read_lines(self) -> tuple[list[str], Optional[list[str]], dict[str, list[str]]]:
        """Load and line-align all text inputs; raises on any mismatch."""
        sources = _read_text_lines(self.source, "source")
        n = len(sources)
        if n == 0:
            raise ManifestError(f"source: {self.source} is empty")
        references = None
        if self.reference is not None:
            references = _read_text_lines(self.reference, "reference")
            if len(references) != n:
                raise ManifestError(
                    f"reference: {self.reference} has {len(references)} lines, source has {n}"
                )
        hyp_lines = {}
        for arm, path in self.hypotheses.items():
            lines = _read_text_lines(path, f"hypotheses.{arm}")
            if len(lines) != n:
                raise ManifestError(
                    f"hypotheses.{arm}: {path} has {len(lines)} lines, source has {n}"
                )
            hyp_lines[arm] = lines
        return sources, references, hyp_lines

    @classmethod
    def from_file(cls, path) -> "IngestionManifest":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest {path} is not valid JSON ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be a JSON object")
        known = {
            "source", "reference", "hypotheses", "output", "encoder", "comet_model",
            "cometkiwi_model", "language_pair", "domain", "unit_norm_contexts", "tokenizer",
        }
        unknown = set(raw) - known
        if unknown:
            raise ManifestError(f"unknown manifest fields: {sorted(unknown)}")
        for required in ("source", "hypotheses", "output"):
            if required not in raw:
                raise ManifestError(f"{required}: required manifest field missing")
        if not isinstance(raw["hypotheses"], dict):
            raise ManifestError("hypotheses: expected an object mapping arm name to file path")
        base = path.parent
        resolve = lambda p: base / p if not Path(p).is_absolute() else Path(p)
        return cls(
            source=resolve(raw["source"]),
            reference=resolve(raw["reference"]) if raw.get("reference") else None,
            hypotheses={arm: resolve(p) for arm, p in raw["hypotheses"].items()},
            output=resolve(raw["output"]),
            encoder=raw.get("encoder", "hash@768"),
            comet_model=raw.get("comet_model", "lexical-f1"),
            cometkiwi_model=raw.get("cometkiwi_model", "heuristic-qe"),
            language_pair=raw.get("language_pair", ""),
            domain=raw.get("domain", ""),
            unit_norm_contexts=bool(raw.get("unit_norm_contexts", True)),
            tokenizer=raw.get("tokenizer", "whitespace+punct"),
        )


def _read_text_lines(path: Path, label: str) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"{label}: cannot read {path}: {exc}") from exc
    return text.splitlines()
