"""Offline ingestion of MT experiment material into replay score logs."""

from .encoders import EncoderError, HashedNgramEncoder, LabseEncoder, make_encoder
from .ingest import IngestError, IngestReport, ingest
from .manifest import IngestionManifest, ManifestError
from .metrics import (
    HeuristicQeScorer,
    LexicalOverlapScorer,
    MetricError,
    bleu_sentence,
    make_scorer,
    tokenize,
)
from .verify import VerifyReport, verify_against_engine

__version__ = "0.1.0"

__all__ = [
    "EncoderError",
    "HashedNgramEncoder",
    "HeuristicQeScorer",
    "IngestError",
    "IngestReport",
    "IngestionManifest",
    "LabseEncoder",
    "LexicalOverlapScorer",
    "ManifestError",
    "MetricError",
    "VerifyReport",
    "bleu_sentence",
    "ingest",
    "make_encoder",
    "make_scorer",
    "tokenize",
    "verify_against_engine",
]
