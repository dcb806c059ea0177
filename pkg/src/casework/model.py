"""Shared domain types: index schema, documents, segments, scored hits.

Every other layer validates against the schema defined here; the serialized
schema JSON is also what gets embedded into translator prompts.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Union

import numpy as np

from .errors import DimensionMismatch, InvalidVector

VECTOR_DIM = 384
UNIT_NORM_TOL = 1e-6

_FIELD_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")

FieldValue = Union[str, int, list]


class FieldType(str, Enum):
    KEYWORD = "keyword"
    TEXT = "text"
    DATE = "date"
    INTEGER = "integer"
    NESTED_SEGMENT = "nested_segment"


# Implicit sub-fields of the nested_segment field, addressed as
# "<nested>.segment_text" / "<nested>.segment_vector" in queries.
SEGMENT_TEXT_SUBFIELD = "segment_text"
SEGMENT_VECTOR_SUBFIELD = "segment_vector"


@dataclass(frozen=True)
class IndexSchema:
    """Field catalog for one index.

    The nested_segment field implicitly contains ``segment_text`` (text) and
    ``segment_vector`` (384-d dense vector) sub-fields.
    """

    name: str
    fields: dict[str, FieldType]
    version: int = 1

    def to_json(self) -> str:
        """Canonical JSON form; exactly this string is injected into prompts."""
        return json.dumps(
            {
                "name": self.name,
                "version": self.version,
                "fields": {k: v.value for k, v in sorted(self.fields.items())},
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "IndexSchema":
        raw = json.loads(text)
        return cls(
            name=raw["name"],
            fields={k: FieldType(v) for k, v in raw["fields"].items()},
            version=int(raw["version"]),
        )

    def nested_field(self) -> Optional[str]:
        for name, ftype in self.fields.items():
            if ftype is FieldType.NESTED_SEGMENT:
                return name
        return None

    def text_fields(self) -> list[str]:
        return sorted(n for n, t in self.fields.items() if t is FieldType.TEXT)


def validate_schema(schema: IndexSchema) -> list[str]:
    """Check all IndexSchema invariants; returns a list of violations.

    An empty list means the schema is valid. Violations are data, not
    failures, so no exception is raised.
    """
    violations: list[str] = []
    nested_count = 0
    has_text = False
    for name, ftype in schema.fields.items():
        if not name:
            violations.append("empty field name")
            continue
        if not _FIELD_NAME_RE.match(name):
            violations.append(f"invalid field name: {name!r}")
        if not isinstance(ftype, FieldType):
            violations.append(f"unknown field type for {name!r}: {ftype!r}")
            continue
        if ftype is FieldType.NESTED_SEGMENT:
            nested_count += 1
            if nested_count > 1:
                violations.append(f"duplicate nested_segment field: {name!r}")
        if ftype is FieldType.TEXT:
            has_text = True
    if len(set(schema.fields)) != len(schema.fields):
        violations.append("duplicate field names")
    if not has_text:
        violations.append("no text field")
    if nested_count == 0:
        violations.append("missing nested_segment field")
    if schema.version < 1:
        violations.append(f"version must be >= 1, got {schema.version}")
    if not schema.name:
        violations.append("empty schema name")
    return violations


def default_enron_schema() -> IndexSchema:
    """The fixed Enron-style schema used by the ingestion pipeline.

    ``x_headers`` holds raw "X-" technical headers as "Name: value" strings so
    they stay queryable as Level-1 metadata while being stripped from segment
    text.
    """
    return IndexSchema(
        name="enron",
        version=1,
        fields={
            "message_id": FieldType.KEYWORD,
            "sender": FieldType.KEYWORD,
            "recipients": FieldType.KEYWORD,
            "people": FieldType.KEYWORD,
            "subject": FieldType.TEXT,
            "body": FieldType.TEXT,
            "sent_date": FieldType.DATE,
            "folder": FieldType.KEYWORD,
            "x_headers": FieldType.KEYWORD,
            "segments": FieldType.NESTED_SEGMENT,
        },
    )


class SchemaRegistry:
    """Single-writer holder for the active schema of one index.

    Any replacement must strictly increase the version; readers get immutable
    snapshots so they can be shared across threads.
    """

    def __init__(self, schema: IndexSchema):
        violations = validate_schema(schema)
        if violations:
            raise ValueError(f"invalid schema: {violations}")
        self._lock = threading.Lock()
        self._schema = schema

    @property
    def schema(self) -> IndexSchema:
        return self._schema

    def replace(self, schema: IndexSchema) -> IndexSchema:
        with self._lock:
            if schema.version <= self._schema.version:
                raise ValueError(
                    f"schema version must increase: {schema.version} <= {self._schema.version}"
                )
            violations = validate_schema(schema)
            if violations:
                raise ValueError(f"invalid schema: {violations}")
            self._schema = schema
            return schema


@dataclass(frozen=True)
class Segment:
    """Atomic semantic unit of a document (Level 2).

    ``char_span`` holds (start, end) offsets into the parent's disentangled
    body; spans of consecutive segments tile each message unit.
    """

    segment_ordinal: int
    segment_text: str
    segment_vector: np.ndarray
    char_span: tuple[int, int]

    def __post_init__(self):
        if not self.segment_text:
            raise ValueError("segment_text must be non-empty")
        if self.segment_ordinal < 0:
            raise ValueError("segment_ordinal must be >= 0")
        start, end = self.char_span
        if not start < end:
            raise ValueError(f"char_span start must be < end, got {self.char_span}")
        vec = np.asarray(self.segment_vector, dtype=np.float32)
        if vec.shape != (VECTOR_DIM,):
            raise DimensionMismatch(
                f"segment_vector must have {VECTOR_DIM} components, got shape {vec.shape}"
            )
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise InvalidVector(f"segment_vector must be unit-norm, got {norm}")
        object.__setattr__(self, "segment_vector", vec)

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return (
            self.segment_ordinal == other.segment_ordinal
            and self.segment_text == other.segment_text
            and self.char_span == other.char_span
            and np.array_equal(self.segment_vector, other.segment_vector)
        )


@dataclass(frozen=True)
class Document:
    """Level-1 full record plus its ordered Level-2 segments."""

    doc_id: str
    fields: dict[str, FieldValue]
    segments: tuple[Segment, ...] = ()
    source_uri: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        ordinals = [s.segment_ordinal for s in self.segments]
        if ordinals != sorted(ordinals) or len(set(ordinals)) != len(ordinals):
            raise ValueError("segments must be ordered by distinct segment_ordinal")


def _value_compatible(ftype: FieldType, value: Any) -> bool:
    if ftype in (FieldType.KEYWORD, FieldType.DATE):
        if isinstance(value, str):
            return True
        return isinstance(value, list) and all(isinstance(v, str) for v in value)
    if ftype is FieldType.TEXT:
        return isinstance(value, str)
    if ftype is FieldType.INTEGER:
        return isinstance(value, int) and not isinstance(value, bool)
    return False


def validate_document(doc: Document, schema: IndexSchema) -> list[str]:
    """Check a document against the schema; returns violations (empty = ok)."""
    violations: list[str] = []
    if not doc.doc_id:
        violations.append("empty doc_id")
    for name, value in doc.fields.items():
        ftype = schema.fields.get(name)
        if ftype is None:
            violations.append(f"unknown field: {name!r}")
            continue
        if ftype is FieldType.NESTED_SEGMENT:
            violations.append(
                f"field {name!r} is the nested_segment field; populate .segments instead"
            )
            continue
        if not _value_compatible(ftype, value):
            violations.append(f"field {name!r} has incompatible value for {ftype.value}")
    if doc.segments and schema.nested_field() is None:
        violations.append("document carries segments but schema has no nested_segment field")
    return violations


@dataclass
class ScoredHit:
    """Per-document raw scores from one query execution.

    ``lexical_score`` is raw BM25 (non-negative, unbounded); ``semantic_score``
    is the max segment cosine in [-1, 1]. ``fused_score`` is set by the fusion
    stage. At least one mode score must be present; the best segment ordinal
    accompanies the semantic score.
    """

    doc_id: str
    lexical_score: Optional[float] = None
    semantic_score: Optional[float] = None
    best_segment_ordinal: Optional[int] = None
    fused_score: Optional[float] = None

    def __post_init__(self):
        if self.lexical_score is None and self.semantic_score is None:
            raise ValueError("at least one of lexical_score/semantic_score required")
        if self.lexical_score is not None and self.lexical_score < 0:
            raise ValueError("lexical_score must be non-negative")
        if (self.semantic_score is None) != (self.best_segment_ordinal is None):
            raise ValueError("best_segment_ordinal present iff semantic_score present")
        if self.semantic_score is not None and not -1.0 <= self.semantic_score <= 1.0:
            raise ValueError("semantic_score must lie in [-1, 1]")
