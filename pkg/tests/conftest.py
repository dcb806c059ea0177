"""Shared fixtures: tiny documents, random unit vectors, engine builders."""

from __future__ import annotations

import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from casework.embedding import HashingEmbedder
from casework.engine import CaseEngine
from casework.model import VECTOR_DIM, Document, Segment, default_enron_schema


def random_unit_vectors(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, VECTOR_DIM))
    return (raw / np.linalg.norm(raw, axis=1, keepdims=True)).astype(np.float32)


def make_document(
    doc_id: str,
    body: str,
    segment_texts: list[str] | None = None,
    embedder: HashingEmbedder | None = None,
    **fields,
) -> Document:
    """Document with one segment per text, spans tiling a synthetic body."""
    embedder = embedder or HashingEmbedder()
    texts = segment_texts if segment_texts is not None else [body]
    segments = []
    offset = 0
    for i, text in enumerate(texts):
        segments.append(
            Segment(
                segment_ordinal=i,
                segment_text=text,
                segment_vector=embedder.embed(text),
                char_span=(offset, offset + len(text)),
            )
        )
        offset += len(text) + 2
    doc_fields = {"message_id": doc_id, "body": body}
    doc_fields.update(fields)
    return Document(doc_id=doc_id, fields=doc_fields, segments=tuple(segments))


@pytest.fixture
def schema():
    return default_enron_schema()


@pytest.fixture
def embedder():
    return HashingEmbedder()


@pytest.fixture
def engine():
    return CaseEngine()


def random_words(rng: random.Random, count: int, pool: list[str]) -> str:
    return " ".join(pool[rng.randrange(len(pool))] for _ in range(count))


WORD_POOL = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo "
    "lima mike november oscar papa quebec romeo sierra tango uniform victor "
    "whiskey xray yankee zulu ledger trade desk swap hedge gas power pipe "
    "curve book risk close settle confirm invoice volume margin position"
).split()
