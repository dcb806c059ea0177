"""The search engine facade: one schema, two indexes, one embedder.

CaseEngine owns the lexical and vector indexes plus the document store and
exposes the two operations everything else builds on: ``add_document`` and
``search``. Search parses and validates the request, executes both scoring
channels, fuses them under a weight configuration, and returns a page of
ranked hits plus the execution trace.

Persistence is a directory: a manifest naming the schema, embedder, synonym
groups, and graph parameters, next to the index and document files. Saving
the same logical state always produces the same bytes, so re-running an
ingest over an unchanged corpus leaves the directory binary-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .analysis import EMPTY_GRAPH, SynonymGraph
from .embedding import Embedder, HashingEmbedder, make_embedder
from .errors import DuplicateDocument, NotFound, PersistenceError
from .executor import ExecutionTrace, QueryExecutor
from .fusion import HYBRID, FusionConfig, fuse
from .lexical import LexicalIndex
from .model import Document, IndexSchema, FieldType, ScoredHit, default_enron_schema
from .querydsl import Request, ensure_valid, parse_request
from .vector import HnswIndex, HnswParams

MANIFEST_FORMAT = 1


@dataclass(frozen=True)
class StoredSegment:
    segment_ordinal: int
    segment_text: str
    char_span: tuple[int, int]


@dataclass(frozen=True)
class SearchResult:
    """One executed search: the page, the totals, and the why."""

    hits: tuple[ScoredHit, ...]
    total: int
    config_name: str
    trace: ExecutionTrace

    def to_obj(self) -> dict:
        return {
            "total": self.total,
            "config": self.config_name,
            "hits": [
                {
                    "rank": i + 1,
                    "doc_id": h.doc_id,
                    "fused_score": h.fused_score,
                    "lexical_score": h.lexical_score,
                    "semantic_score": h.semantic_score,
                    "best_segment_ordinal": h.best_segment_ordinal,
                }
                for i, h in enumerate(self.hits)
            ],
            "trace": self.trace.to_obj(),
        }


class CaseEngine:
    """Index pair plus document store behind a single search interface."""

    def __init__(
        self,
        schema: Optional[IndexSchema] = None,
        embedder: Optional[Embedder] = None,
        synonyms: SynonymGraph = EMPTY_GRAPH,
        hnsw_params: HnswParams = HnswParams(),
    ):
        self.schema = schema if schema is not None else default_enron_schema()
        self.embedder = embedder if embedder is not None else HashingEmbedder()
        self.synonyms = synonyms
        self.lexical = LexicalIndex(self.schema)
        self.vectors = HnswIndex(hnsw_params)
        self._docs: dict[str, dict] = {}
        self.executor = QueryExecutor(
            self.lexical, self.vectors, self.embedder, self.synonyms
        )

    # -- documents -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._docs)

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def doc_ids(self) -> list[str]:
        return sorted(self._docs)

    def add_document(self, doc: Document) -> None:
        """Index one document in both channels; all-or-nothing per document."""
        if doc.doc_id in self._docs:
            raise DuplicateDocument(doc.doc_id)
        self.lexical.index_document(doc)
        for seg in doc.segments:
            self.vectors.insert_vector(
                (doc.doc_id, seg.segment_ordinal), seg.segment_vector
            )
        self._docs[doc.doc_id] = {
            "fields": {k: v for k, v in doc.fields.items()},
            "segments": [
                {
                    "segment_ordinal": s.segment_ordinal,
                    "segment_text": s.segment_text,
                    "char_span": list(s.char_span),
                }
                for s in doc.segments
            ],
            "source_uri": doc.source_uri,
        }

    def document(self, doc_id: str) -> dict:
        """Stored fields and segments for display; raises NotFound."""
        record = self._docs.get(doc_id)
        if record is None:
            raise NotFound(f"document {doc_id}")
        return {
            "doc_id": doc_id,
            "fields": dict(record["fields"]),
            "segments": [dict(s) for s in record["segments"]],
            "source_uri": record["source_uri"],
        }

    # -- search -----------------------------------------------------------------

    def search(
        self,
        request: Union[Request, str, bytes, dict],
        config: FusionConfig = HYBRID,
    ) -> SearchResult:
        if not isinstance(request, Request):
            request = parse_request(request)
        ensure_valid(request, self.schema)
        raw_hits, trace = self.executor.execute(request)
        ranked = fuse(raw_hits, config)
        page = tuple(ranked[request.from_ : request.from_ + request.size])
        return SearchResult(
            hits=page, total=len(ranked), config_name=config.name, trace=trace
        )

    # -- persistence ---------------------------------------------------------------

    def save(self, root: Path) -> None:
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        manifest = {
            "format": MANIFEST_FORMAT,
            "schema": json.loads(self.schema.to_json()),
            "embedder": {
                "kind": self.embedder.kind,
                "url": getattr(self.embedder, "url", ""),
            },
            "hnsw": {
                "m": self.vectors.params.m,
                "ef_construction": self.vectors.params.ef_construction,
                "ef_search": self.vectors.params.ef_search,
                "seed": self.vectors.params.seed,
            },
            "synonym_groups": sorted(
                sorted(group) for group in self.synonyms.groups
            ),
            "doc_count": len(self._docs),
        }
        with open(root / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        self.lexical.save(root / "lexical")
        self.vectors.save(root / "vectors")
        with open(root / "docs.jsonl", "w", encoding="utf-8") as fh:
            for doc_id in sorted(self._docs):
                record = {"doc_id": doc_id, **self._docs[doc_id]}
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
                fh.write("\n")

    @classmethod
    def load(cls, root: Path) -> "CaseEngine":
        root = Path(root)
        manifest_path = root / "manifest.json"
        if not manifest_path.exists():
            raise PersistenceError(f"missing {manifest_path}")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        if manifest.get("format") != MANIFEST_FORMAT:
            raise PersistenceError(
                f"engine manifest format {manifest.get('format')} != {MANIFEST_FORMAT}"
            )
        schema_obj = manifest["schema"]
        schema = IndexSchema(
            name=schema_obj["name"],
            fields={k: FieldType(v) for k, v in schema_obj["fields"].items()},
            version=schema_obj["version"],
        )
        emb = manifest["embedder"]
        embedder = make_embedder(emb["kind"], url=emb.get("url", ""))
        synonyms = SynonymGraph(
            groups=tuple(frozenset(g) for g in manifest["synonym_groups"])
        )
        engine = cls(schema=schema, embedder=embedder, synonyms=synonyms)
        engine.lexical = LexicalIndex.load(root / "lexical", schema)
        engine.vectors = HnswIndex.load(root / "vectors")
        engine.executor = QueryExecutor(
            engine.lexical, engine.vectors, engine.embedder, engine.synonyms
        )
        with open(root / "docs.jsonl", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                doc_id = record.pop("doc_id")
                record["segments"] = [
                    {
                        "segment_ordinal": s["segment_ordinal"],
                        "segment_text": s["segment_text"],
                        "char_span": list(s["char_span"]),
                    }
                    for s in record["segments"]
                ]
                engine._docs[doc_id] = record
        if len(engine._docs) != manifest["doc_count"]:
            raise PersistenceError(
                f"doc store holds {len(engine._docs)} documents, manifest says "
                f"{manifest['doc_count']}"
            )
        return engine
