"""Level-1 inverted index with Okapi BM25 ranking over schema text fields.

Two posting scopes live side by side: document scope for the Level-1 text
fields (body, subject), and segment scope for ``<nested>.segment_text`` so
nested clauses can be matched within a single segment. Keyword/date/integer
values are stored verbatim for exact and range filtering. The index is
append-only; deletions are out of scope for evidence corpora.

Synonym expansion never touches the index: expanded terms contribute via max
within their set at query time only.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from .analysis import tokenize
from .errors import DuplicateDocument, PersistenceError, SchemaMismatch, UnknownField
from .model import Document, FieldType, IndexSchema, ScoredHit, validate_document

BM25_K1 = 1.2
BM25_B = 0.75

FORMAT_VERSION = 1

# Unit key: doc_id for document scope, (doc_id, segment_ordinal) for segment scope.
UnitKey = Union[str, tuple]


@dataclass(frozen=True)
class FieldStats:
    """Okapi collection statistics for one field."""

    doc_count: int
    total_token_count: int

    @property
    def avg_field_length(self) -> float:
        if self.doc_count == 0:
            return 0.0
        return self.total_token_count / self.doc_count


def bm25_idf(doc_count: int, doc_freq: int) -> float:
    """Non-negative Okapi idf: ln(1 + (N - df + 0.5) / (df + 0.5))."""
    return math.log(1.0 + (doc_count - doc_freq + 0.5) / (doc_freq + 0.5))


def bm25_tf_part(tf: int, length: int, avg_length: float) -> float:
    if tf == 0:
        return 0.0
    denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * (length / avg_length))
    return tf * (BM25_K1 + 1.0) / denom


class _FieldIndex:
    """Postings and length bookkeeping for one field (one scope)."""

    def __init__(self):
        # term -> unit key -> positions (ascending)
        self.postings: dict[str, dict[UnitKey, list[int]]] = {}
        self.lengths: dict[UnitKey, int] = {}
        self.total_tokens = 0

    def add(self, key: UnitKey, terms: Iterable[tuple[str, int]]) -> None:
        count = 0
        for term, pos in terms:
            self.postings.setdefault(term, {}).setdefault(key, []).append(pos)
            count += 1
        self.lengths[key] = count
        self.total_tokens += count

    @property
    def unit_count(self) -> int:
        return len(self.lengths)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def tf(self, term: str, key: UnitKey) -> int:
        return len(self.postings.get(term, {}).get(key, ()))

    def stats(self) -> FieldStats:
        return FieldStats(self.unit_count, self.total_tokens)

    def score(self, term: str, key: UnitKey) -> float:
        tf = self.tf(term, key)
        if tf == 0:
            return 0.0
        stats = self.stats()
        idf = bm25_idf(stats.doc_count, self.df(term))
        return idf * bm25_tf_part(tf, self.lengths[key], stats.avg_field_length)

    def matching_units(self, term: str) -> dict[UnitKey, list[int]]:
        return self.postings.get(term, {})


def _pad_date_bound(bound: str, is_upper: bool) -> str:
    """Day-granularity bounds include the whole day against full timestamps."""
    if len(bound) == 10:  # YYYY-MM-DD
        return bound + ("T23:59:59Z" if is_upper else "T00:00:00Z")
    return bound


class LexicalIndex:
    """Append-only inverted index bound to one schema snapshot."""

    def __init__(self, schema: IndexSchema):
        self.schema = schema
        self._lock = threading.RLock()
        self._fields: dict[str, _FieldIndex] = {
            name: _FieldIndex() for name in schema.text_fields()
        }
        nested = schema.nested_field()
        self._segment_field: Optional[str] = None
        if nested is not None:
            self._segment_field = f"{nested}.segment_text"
            self._fields[self._segment_field] = _FieldIndex()
        # doc_id -> {field: stored value} for keyword/date/integer filtering
        self._stored: dict[str, dict[str, object]] = {}

    # -- writes ------------------------------------------------------------

    def index_document(self, doc: Document) -> None:
        """Tokenize and post all text fields; store filterable values.

        Raises DuplicateDocument / SchemaMismatch; the document becomes
        visible atomically.
        """
        violations = validate_document(doc, self.schema)
        if violations:
            raise SchemaMismatch("; ".join(violations))
        with self._lock:
            if doc.doc_id in self._stored:
                raise DuplicateDocument(doc.doc_id)
            stored: dict[str, object] = {}
            for name, value in doc.fields.items():
                ftype = self.schema.fields[name]
                if ftype is FieldType.TEXT:
                    self._fields[name].add(doc.doc_id, tokenize(value))
                else:
                    stored[name] = value
            # text fields absent from the doc still count a zero-length unit
            for name in self.schema.text_fields():
                if name not in doc.fields:
                    self._fields[name].add(doc.doc_id, ())
            if self._segment_field is not None:
                seg_index = self._fields[self._segment_field]
                for seg in doc.segments:
                    seg_index.add(
                        (doc.doc_id, seg.segment_ordinal), tokenize(seg.segment_text)
                    )
            self._stored[doc.doc_id] = stored

    # -- reads -------------------------------------------------------------

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._stored

    def doc_ids(self) -> list[str]:
        return sorted(self._stored)

    @property
    def doc_count(self) -> int:
        return len(self._stored)

    def _field_index(self, field: str) -> _FieldIndex:
        fi = self._fields.get(field)
        if fi is None:
            raise UnknownField(field)
        return fi

    def field_stats(self, field: str) -> FieldStats:
        return self._field_index(field).stats()

    def document_frequency(self, field: str, term: str) -> int:
        return self._field_index(field).df(term)

    def bm25_term_score(self, term: str, field: str, doc_id: str) -> float:
        """Okapi score of one term for one document's field; 0 if absent."""
        return self._field_index(field).score(term, doc_id)

    def bm25_segment_score(self, term: str, key: tuple) -> float:
        if self._segment_field is None:
            raise UnknownField("schema has no nested_segment field")
        return self._fields[self._segment_field].score(term, key)

    def matching_doc_ids(self, field: str, term: str) -> set[str]:
        return set(self._field_index(field).matching_units(term))

    def matching_segment_keys(self, term: str) -> set[tuple]:
        if self._segment_field is None:
            raise UnknownField("schema has no nested_segment field")
        return set(self._fields[self._segment_field].matching_units(term))

    def search_lexical(
        self, terms: list[tuple[str, frozenset[str]]], k: int
    ) -> list[ScoredHit]:
        """Top-k documents by summed per-query-term BM25.

        Each entry pairs a field with the synonym expansion of one query term;
        the expansion contributes via max within the set. Ties break by doc_id
        ascending.
        """
        if k <= 0:
            return []
        scores = self.score_expanded_terms(terms)
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        return [ScoredHit(doc_id=d, lexical_score=s) for d, s in ranked]

    def score_expanded_terms(
        self, terms: list[tuple[str, frozenset[str]]]
    ) -> dict[str, float]:
        """Per-document summed lexical score over expanded query terms."""
        scores: dict[str, float] = {}
        for field, termset in terms:
            fi = self._field_index(field)
            candidates: set[str] = set()
            for syn in termset:
                candidates.update(fi.matching_units(syn))
            for doc_id in candidates:
                best = max(fi.score(syn, doc_id) for syn in termset)
                scores[doc_id] = scores.get(doc_id, 0.0) + best
        return scores

    # -- filters -----------------------------------------------------------

    def _check_stored_field(self, field: str) -> FieldType:
        ftype = self.schema.fields.get(field)
        if ftype is None or ftype in (FieldType.TEXT, FieldType.NESTED_SEGMENT):
            raise UnknownField(field)
        return ftype

    def filter_term(self, field: str, value) -> set[str]:
        """Documents whose stored field equals value (any element for lists)."""
        self._check_stored_field(field)
        out = set()
        for doc_id, stored in self._stored.items():
            sval = stored.get(field)
            if sval is None:
                continue
            if isinstance(sval, list):
                if value in sval:
                    out.add(doc_id)
            elif sval == value:
                out.add(doc_id)
        return out

    def filter_range(self, field: str, gte=None, lte=None) -> set[str]:
        """Documents whose stored date/integer field lies within the bounds."""
        ftype = self._check_stored_field(field)
        lo, hi = gte, lte
        if ftype is FieldType.DATE:
            if lo is not None:
                lo = _pad_date_bound(str(lo), is_upper=False)
            if hi is not None:
                hi = _pad_date_bound(str(hi), is_upper=True)
        out = set()
        for doc_id, stored in self._stored.items():
            sval = stored.get(field)
            if sval is None:
                continue
            values = sval if isinstance(sval, list) else [sval]
            for v in values:
                if lo is not None and v < lo:
                    continue
                if hi is not None and v > hi:
                    continue
                out.add(doc_id)
                break
        return out

    def stored_fields(self, doc_id: str) -> dict[str, object]:
        return dict(self._stored.get(doc_id, {}))

    # -- persistence ---------------------------------------------------------

    def _posting_lines(self) -> list[str]:
        lines = []
        for field in sorted(self._fields):
            fi = self._fields[field]
            for term in sorted(fi.postings):
                units = fi.postings[term]
                entries = sorted(
                    (list(key) if isinstance(key, tuple) else key, positions)
                    for key, positions in units.items()
                )
                lines.append(
                    json.dumps(
                        {"field": field, "term": term, "postings": entries},
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                )
        return lines

    def postings_byte_size(self) -> int:
        """Physical size of the serialized posting lists."""
        return sum(len(line.encode("utf-8")) + 1 for line in self._posting_lines())

    def save(self, directory: Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        header = {
            "format": FORMAT_VERSION,
            "schema_version": self.schema.version,
            "doc_count": self.doc_count,
        }
        with open(directory / "postings.jsonl", "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
            for line in self._posting_lines():
                fh.write(line + "\n")
        seg_lengths_by_doc: dict[str, dict[str, int]] = {}
        if self._segment_field is not None:
            for key, length in self._fields[self._segment_field].lengths.items():
                doc_id, ordinal = key
                seg_lengths_by_doc.setdefault(doc_id, {})[str(ordinal)] = length
        with open(directory / "stored.jsonl", "w", encoding="utf-8") as fh:
            for doc_id in sorted(self._stored):
                lengths = {
                    field: fi.lengths[doc_id]
                    for field, fi in sorted(self._fields.items())
                    if doc_id in fi.lengths
                }
                fh.write(
                    json.dumps(
                        {
                            "doc_id": doc_id,
                            "stored": self._stored[doc_id],
                            "lengths": lengths,
                            "segment_lengths": seg_lengths_by_doc.get(doc_id, {}),
                        },
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, directory: Path, schema: IndexSchema) -> "LexicalIndex":
        directory = Path(directory)
        postings_path = directory / "postings.jsonl"
        if not postings_path.exists():
            raise PersistenceError(f"missing {postings_path}")
        index = cls(schema)
        with open(postings_path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != FORMAT_VERSION:
                raise PersistenceError(
                    f"lexical index format {header.get('format')} != {FORMAT_VERSION}"
                )
            if header.get("schema_version") != schema.version:
                raise PersistenceError(
                    f"index built under schema version {header.get('schema_version')}, "
                    f"active is {schema.version}"
                )
            for raw in fh:
                entry = json.loads(raw)
                fi = index._fields.get(entry["field"])
                if fi is None:
                    raise PersistenceError(f"unknown field in postings: {entry['field']}")
                for key, positions in entry["postings"]:
                    if isinstance(key, list):
                        key = (key[0], key[1])
                    fi.postings.setdefault(entry["term"], {})[key] = positions
        with open(directory / "stored.jsonl", encoding="utf-8") as fh:
            for raw in fh:
                entry = json.loads(raw)
                doc_id = entry["doc_id"]
                index._stored[doc_id] = entry["stored"]
                for field, length in entry["lengths"].items():
                    fi = index._fields[field]
                    fi.lengths[doc_id] = length
                    fi.total_tokens += length
                if index._segment_field is not None:
                    fi = index._fields[index._segment_field]
                    for ordinal, length in entry.get("segment_lengths", {}).items():
                        fi.lengths[(doc_id, int(ordinal))] = length
                        fi.total_tokens += length
        if index.doc_count != header["doc_count"]:
            raise PersistenceError(
                f"stored doc count {index.doc_count} != manifest {header['doc_count']}"
            )
        return index
