"""Sentence encoders producing the context vectors stored in replay logs.

Two families:
  hash@<dim>  deterministic character/word n-gram feature hashing; runs
              anywhere, needs no model downloads, reproducible bit-for-bit
  labse       the multilingual sentence encoder used by the live pipeline
              (d=768); needs the sentence-transformers package and its
              model weights
"""

from __future__ import annotations

import hashlib
import unicodedata

import numpy as np


class EncoderError(RuntimeError):
    """Model loading or encoding failure."""


class HashedNgramEncoder:
    """Stable feature-hashing encoder over word and character trigrams.

    Uses md5 (not Python's randomized hash) so identical inputs produce
    identical vectors on every platform and run.
    """

    def __init__(self, dim: int = 768, unit_norm: bool = True):
        if dim < 1:
            raise EncoderError(f"encoder dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self.unit_norm = unit_norm

    @property
    def name(self) -> str:
        return f"hash@{self.dim}"

    def _slot(self, feature: str) -> tuple[int, float]:
        digest = hashlib.md5(feature.encode("utf-8")).digest()
        idx = int.from_bytes(digest[:4], "little") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return idx, sign

    def encode(self, sentence: str) -> np.ndarray:
        text = unicodedata.normalize("NFC", sentence).lower()
        vec = np.zeros(self.dim, dtype=np.float64)
        words = text.split()
        for word in words:
            idx, sign = self._slot("w:" + word)
            vec[idx] += sign
            padded = f" {word} "
            for i in range(len(padded) - 2):
                idx, sign = self._slot("c3:" + padded[i : i + 3])
                vec[idx] += 0.5 * sign
        if not words:
            vec[self._slot("empty")[0]] = 1.0
        if self.unit_norm:
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
        return vec

    def encode_batch(self, sentences: list[str]) -> np.ndarray:
        return np.stack([self.encode(s) for s in sentences])


class LabseEncoder:
    """Multilingual BERT sentence encoder (768-dim) behind a lazy import."""

    MODEL_ID = "sentence-transformers/LaBSE"

    def __init__(self, unit_norm: bool = True):
        self.dim = 768
        self.unit_norm = unit_norm
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                "model loading failure: sentence-transformers is not installed "
                "(pip install scorekit[models])"
            ) from exc
        try:
            self._model = SentenceTransformer(self.MODEL_ID)
        except Exception as exc:
            raise EncoderError(f"model loading failure: cannot load {self.MODEL_ID}: {exc}") from exc

    @property
    def name(self) -> str:
        return "labse"

    def encode_batch(self, sentences: list[str]) -> np.ndarray:
        vecs = np.asarray(self._model.encode(sentences), dtype=np.float64)
        if self.unit_norm:
            norms = np.linalg.norm(vecs, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            vecs = vecs / norms
        return vecs

    def encode(self, sentence: str) -> np.ndarray:
        return self.encode_batch([sentence])[0]


def make_encoder(identifier: str, unit_norm: bool = True):
    """Build an encoder from its manifest identifier."""
    ident = identifier.strip().lower()
    if ident == "labse":
        return LabseEncoder(unit_norm=unit_norm)
    if ident.startswith("hash@"):
        try:
            dim = int(ident.split("@", 1)[1])
        except ValueError as exc:
            raise EncoderError(f"bad encoder identifier {identifier!r}") from exc
        return HashedNgramEncoder(dim=dim, unit_norm=unit_norm)
    raise EncoderError(f"unknown encoder {identifier!r}; use 'labse' or 'hash@<dim>'")
