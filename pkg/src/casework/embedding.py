"""384-dimensional unit vectors for segments and query text.

The default embedder is a deterministic signed feature-hashing scheme over
word unigrams and character trigrams, which keeps the whole test suite
hermetic while honoring the same contract a real sentence-embedding model
would provide at this boundary: 384 components, unit L2 norm, cosine as the
relevance measure. The hash is FNV-1a 64-bit with the standard offset basis
(see README for the exact constants); a second FNV pass with a flipped basis
supplies the sign, which spreads cosine values of unrelated texts around 0
instead of biasing them positive.

A remote HTTP embedder can replace it per index; mixing embedders within one
index is forbidden and enforced through the index manifest.
"""

from __future__ import annotations

import json
from typing import Optional, Protocol

import httpx
import numpy as np

from .analysis import tokenize
from .errors import DimensionMismatch, EmbedderUnavailable
from .model import VECTOR_DIM


class Embedder(Protocol):
    """Anything that turns text into 384-d unit vectors."""

    kind: str

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]: ...

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SIGN_OFFSET = _FNV_OFFSET ^ 0x5A5A5A5A5A5A5A5A
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes, basis: int) -> int:
    h = basis
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def normalize(vector: np.ndarray) -> np.ndarray:
    """L2-normalize; scaling invariance of cosine ranking rests on this."""
    vec = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        basis = np.zeros(vec.shape[0], dtype=np.float32)
        basis[0] = 1.0
        return basis
    return (vec / norm).astype(np.float32)


def _features(text: str) -> list[str]:
    lowered = text.lower()
    feats = [f"w:{term}" for term, _ in tokenize(text)]
    feats.extend(f"t:{lowered[i : i + 3]}" for i in range(len(lowered) - 2))
    return feats


class HashingEmbedder:
    """Deterministic local embedder; pure function of the input text."""

    kind = "hashing"

    def embed(self, text: str) -> np.ndarray:
        acc = np.zeros(VECTOR_DIM, dtype=np.float64)
        for feat in _features(text):
            data = feat.encode("utf-8")
            bucket = _fnv1a(data, _FNV_OFFSET) % VECTOR_DIM
            sign = 1.0 if _fnv1a(data, _SIGN_OFFSET) & 1 == 0 else -1.0
            acc[bucket] += sign
        return normalize(acc)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """Client for an HTTP embedding endpoint.

    Wire format: POST {"texts": [...]} -> {"vectors": [[...384 floats...]]}.
    Vectors are re-normalized locally before use. Network failures raise
    EmbedderUnavailable (retryable); a wrong dimension is a hard error.
    """

    kind = "remote"

    def __init__(self, url: str, timeout_ms: int = 10_000,
                 client: Optional[httpx.Client] = None):
        self.url = url
        self.timeout = timeout_ms / 1000.0
        self._client = client or httpx.Client()

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        try:
            resp = self._client.post(
                self.url, json={"texts": texts}, timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            raise EmbedderUnavailable(f"embedding endpoint failed: {exc}") from exc
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise EmbedderUnavailable(
                f"endpoint returned {len(vectors) if isinstance(vectors, list) else 'no'} "
                f"vectors for {len(texts)} texts"
            )
        out = []
        for vec in vectors:
            if len(vec) != VECTOR_DIM:
                raise DimensionMismatch(
                    f"endpoint returned {len(vec)} components, expected {VECTOR_DIM}"
                )
            out.append(normalize(np.asarray(vec, dtype=np.float64)))
        return out


def make_embedder(kind: str, url: str = "", timeout_ms: int = 10_000):
    if kind == "hashing":
        return HashingEmbedder()
    if kind == "remote":
        if not url:
            raise ValueError("remote embedder requires a URL")
        return RemoteEmbedder(url, timeout_ms)
    raise ValueError(f"unknown embedder kind: {kind!r}")


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit vectors, clamped to [-1, 1] against rounding."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(min(1.0, max(-1.0, np.dot(a, b))))
