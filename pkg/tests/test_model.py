"""Schema, segment, and document invariants."""

import json

import numpy as np
import pytest

from casework.errors import DimensionMismatch, InvalidVector
from casework.model import (
    VECTOR_DIM,
    Document,
    FieldType,
    IndexSchema,
    ScoredHit,
    SchemaRegistry,
    Segment,
    default_enron_schema,
    validate_document,
    validate_schema,
)


def unit_vector(axis: int = 0) -> np.ndarray:
    vec = np.zeros(VECTOR_DIM, dtype=np.float32)
    vec[axis] = 1.0
    return vec


class TestSchema:
    def test_default_schema_fields(self):
        schema = default_enron_schema()
        assert schema.fields["message_id"] is FieldType.KEYWORD
        assert schema.fields["body"] is FieldType.TEXT
        assert schema.fields["sent_date"] is FieldType.DATE
        assert schema.fields["segments"] is FieldType.NESTED_SEGMENT
        assert schema.fields["x_headers"] is FieldType.KEYWORD
        assert len(schema.fields) == 10
        assert validate_schema(schema) == []

    def test_canonical_json_is_sorted_and_compact(self):
        schema = default_enron_schema()
        text = schema.to_json()
        assert ": " not in text and ", " not in text
        keys = list(json.loads(text)["fields"])
        assert keys == sorted(keys)

    def test_round_trip(self):
        schema = default_enron_schema()
        again = IndexSchema.from_json(schema.to_json())
        assert again == schema

    def test_requires_text_field(self):
        schema = IndexSchema(name="bad", fields={"id": FieldType.KEYWORD})
        assert any("text" in v for v in validate_schema(schema))

    def test_rejects_two_nested_fields(self):
        schema = IndexSchema(
            name="bad",
            fields={
                "body": FieldType.TEXT,
                "a": FieldType.NESTED_SEGMENT,
                "b": FieldType.NESTED_SEGMENT,
            },
        )
        assert any("nested_segment" in v for v in validate_schema(schema))

    def test_registry_versions_strictly_increase(self):
        first = default_enron_schema()
        registry = SchemaRegistry(first)
        assert registry.schema is first
        with pytest.raises(ValueError):
            registry.replace(first)
        bumped = IndexSchema(name=first.name, fields=dict(first.fields), version=first.version + 1)
        assert registry.replace(bumped) is bumped


class TestSegment:
    def test_vector_norm_enforced(self):
        with pytest.raises(InvalidVector):
            Segment(
                segment_ordinal=0,
                segment_text="x",
                segment_vector=np.ones(VECTOR_DIM, dtype=np.float32),
                char_span=(0, 1),
            )

    def test_dimension_enforced(self):
        with pytest.raises(DimensionMismatch):
            Segment(
                segment_ordinal=0,
                segment_text="x",
                segment_vector=np.zeros(3, dtype=np.float32),
                char_span=(0, 1),
            )

    def test_span_ordering_enforced(self):
        with pytest.raises(ValueError):
            Segment(
                segment_ordinal=0,
                segment_text="x",
                segment_vector=unit_vector(),
                char_span=(5, 2),
            )


class TestDocument:
    def test_duplicate_ordinals_rejected(self):
        seg = Segment(0, "a", unit_vector(), (0, 1))
        with pytest.raises(ValueError):
            Document(doc_id="d", fields={"body": "a"}, segments=(seg, seg))

    def test_unknown_field_flagged(self):
        doc = Document(doc_id="d", fields={"body": "a", "bogus": "x"})
        violations = validate_document(doc, default_enron_schema())
        assert any("bogus" in v for v in violations)

    def test_clean_document_passes(self):
        doc = Document(
            doc_id="d",
            fields={"message_id": "d", "body": "hello", "sender": "a@b.c"},
        )
        assert validate_document(doc, default_enron_schema()) == []


class TestScoredHit:
    def test_best_segment_requires_semantic(self):
        with pytest.raises(ValueError):
            ScoredHit(doc_id="d", best_segment_ordinal=1)

    def test_semantic_bounds(self):
        with pytest.raises(ValueError):
            ScoredHit(doc_id="d", semantic_score=1.5, best_segment_ordinal=0)

    def test_valid_hit(self):
        hit = ScoredHit(
            doc_id="d",
            lexical_score=1.0,
            semantic_score=0.5,
            best_segment_ordinal=2,
            fused_score=0.7,
        )
        assert hit.doc_id == "d"
