"""Query execution over the lexical and vector indexes.

A request is evaluated into per-document raw contributions on two channels:

* lexical: summed BM25 over query terms, synonym expansions folded in by
  taking the best-scoring member of each expansion set;
* semantic: cosine similarity of the best matching segment, with the winning
  segment ordinal recorded for display.

Bool semantics: ``filter`` and ``must`` intersect candidate sets, ``should``
unions them (and only constrains membership when there is no must/filter),
``must_not`` subtracts. Lexical scores add across clauses; semantic scores
combine by max, so a document's semantic evidence is always its single best
segment. Nested clauses evaluate their inner query per segment and require
every inner condition to hold on the same segment.

Execution is mode-free: both channels are always computed. Ablation happens
downstream in fusion, where zero-weight channels drop their candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from .analysis import SynonymGraph, expand_term, tokenize
from .embedding import Embedder
from .errors import ParseError
from .lexical import LexicalIndex
from .model import ScoredHit
from .querydsl import Bool, Knn, Match, Nested, Query, Range, Request, Term
from .vector import HnswIndex, SegmentKey


@dataclass(frozen=True)
class ExpansionTrace:
    """One query term and the synonym set it contributed."""

    json_path: str
    field: str
    term: str
    expanded: tuple[str, ...]


@dataclass(frozen=True)
class KnnTrace:
    """One vector clause: requested k and how many segments came back."""

    json_path: str
    field: str
    k: int
    matched: int


@dataclass(frozen=True)
class ExecutionTrace:
    """Everything a reviewer needs to see why documents matched."""

    expansions: tuple[ExpansionTrace, ...] = ()
    knns: tuple[KnnTrace, ...] = ()
    candidate_count: int = 0

    def to_obj(self) -> dict:
        return {
            "expansions": [
                {
                    "json_path": e.json_path,
                    "field": e.field,
                    "term": e.term,
                    "expanded": list(e.expanded),
                }
                for e in self.expansions
            ],
            "knns": [
                {
                    "json_path": t.json_path,
                    "field": t.field,
                    "k": t.k,
                    "matched": t.matched,
                }
                for t in self.knns
            ],
            "candidate_count": self.candidate_count,
        }


@dataclass
class _DocResult:
    """Candidate documents plus per-channel contributions."""

    docs: set[str]
    lex: dict[str, float] = dc_field(default_factory=dict)
    sem: dict[str, tuple[float, int]] = dc_field(default_factory=dict)
    scoreless: bool = False


@dataclass
class _SegContribution:
    lex: Optional[float] = None
    sem: Optional[float] = None


def _merge_sem(
    into: dict[str, tuple[float, int]], other: dict[str, tuple[float, int]]
) -> None:
    """Max-combine semantic evidence; ties keep the lower ordinal."""
    for doc_id, (cos, ordinal) in other.items():
        cur = into.get(doc_id)
        if cur is None or (cos, -ordinal) > (cur[0], -cur[1]):
            into[doc_id] = (cos, ordinal)


class QueryExecutor:
    """Evaluates parsed requests against one index pair."""

    def __init__(
        self,
        lexical: LexicalIndex,
        vectors: HnswIndex,
        embedder: Embedder,
        synonyms: SynonymGraph,
    ):
        self.lexical = lexical
        self.vectors = vectors
        self.embedder = embedder
        self.synonyms = synonyms

    def execute(self, request: Request) -> tuple[list[ScoredHit], ExecutionTrace]:
        """Raw hits (unfused, doc_id order) plus the execution trace."""
        expansions: list[ExpansionTrace] = []
        knns: list[KnnTrace] = []
        result = self._eval_doc(request.query, "$.query", expansions, knns)
        hits = []
        for doc_id in sorted(result.docs):
            sem = result.sem.get(doc_id)
            lex = result.lex.get(doc_id)
            if lex is None and sem is None:
                # Filter-only candidates carry a neutral lexical score.
                lex = 0.0
            hits.append(
                ScoredHit(
                    doc_id=doc_id,
                    lexical_score=lex,
                    semantic_score=sem[0] if sem else None,
                    best_segment_ordinal=sem[1] if sem else None,
                )
            )
        trace = ExecutionTrace(
            expansions=tuple(expansions),
            knns=tuple(knns),
            candidate_count=len(hits),
        )
        return hits, trace

    # -- document-level evaluation ------------------------------------------------

    def _eval_doc(
        self,
        node: Query,
        path: str,
        expansions: list[ExpansionTrace],
        knns: list[KnnTrace],
    ) -> _DocResult:
        if isinstance(node, Match):
            return self._eval_match(node, path, expansions)
        if isinstance(node, Term):
            return _DocResult(
                docs=self.lexical.filter_term(node.field, node.value), scoreless=True
            )
        if isinstance(node, Range):
            return _DocResult(
                docs=self.lexical.filter_range(node.field, gte=node.gte, lte=node.lte),
                scoreless=True,
            )
        if isinstance(node, Nested):
            return self._eval_nested(node, path, expansions, knns)
        if isinstance(node, Bool):
            return self._eval_bool(node, path, expansions, knns)
        if isinstance(node, Knn):
            raise ParseError(f"{path}.knn", "knn must appear inside a nested clause")
        raise TypeError(f"not a query node: {type(node).__name__}")

    def _eval_match(
        self, node: Match, path: str, expansions: list[ExpansionTrace]
    ) -> _DocResult:
        terms = []
        for term in tokenize(node.text).terms():
            expanded = expand_term(term, self.synonyms)
            terms.append((node.field, expanded))
            if len(expanded) > 1:
                expansions.append(
                    ExpansionTrace(
                        json_path=f"{path}.match",
                        field=node.field,
                        term=term,
                        expanded=tuple(sorted(expanded)),
                    )
                )
        scores = self.lexical.score_expanded_terms(terms)
        return _DocResult(docs=set(scores), lex=scores)

    def _eval_bool(
        self,
        node: Bool,
        path: str,
        expansions: list[ExpansionTrace],
        knns: list[KnnTrace],
    ) -> _DocResult:
        children = {
            section: [
                self._eval_doc(child, f"{path}.bool.{section}[{i}]", expansions, knns)
                for i, child in enumerate(getattr(node, section))
            ]
            for section in ("must", "should", "must_not", "filter")
        }
        anchored = bool(children["must"] or children["filter"])

        docs: Optional[set[str]] = None
        for child in children["must"] + children["filter"]:
            docs = child.docs if docs is None else docs & child.docs
        if not anchored:
            docs = set()
            for child in children["should"]:
                docs |= child.docs
            if not children["should"]:
                # pure must_not: everything not excluded
                docs = set(self.lexical.doc_ids())
        for child in children["must_not"]:
            docs -= child.docs

        lex: dict[str, float] = {}
        sem: dict[str, tuple[float, int]] = {}
        for child in children["must"] + children["should"]:
            for doc_id, score in child.lex.items():
                if doc_id in docs:
                    lex[doc_id] = lex.get(doc_id, 0.0) + score
            _merge_sem(sem, {d: v for d, v in child.sem.items() if d in docs})
        return _DocResult(docs=docs, lex=lex, sem=sem)

    # -- segment-level evaluation --------------------------------------------------

    def _eval_nested(
        self,
        node: Nested,
        path: str,
        expansions: list[ExpansionTrace],
        knns: list[KnnTrace],
    ) -> _DocResult:
        contributions = self._eval_seg(
            node.query, f"{path}.nested.query", node.path, expansions, knns
        )
        result = _DocResult(docs=set())
        best_lex: dict[str, float] = {}
        for key, contrib in contributions.items():
            doc_id, ordinal = key
            result.docs.add(doc_id)
            if contrib.lex is not None:
                if doc_id not in best_lex or contrib.lex > best_lex[doc_id]:
                    best_lex[doc_id] = contrib.lex
            if contrib.sem is not None:
                _merge_sem(result.sem, {doc_id: (contrib.sem, ordinal)})
        result.lex = best_lex
        return result

    def _eval_seg(
        self,
        node: Query,
        path: str,
        nested_field: str,
        expansions: list[ExpansionTrace],
        knns: list[KnnTrace],
    ) -> dict[SegmentKey, _SegContribution]:
        if isinstance(node, Match):
            return self._eval_seg_match(node, path, expansions)
        if isinstance(node, Knn):
            return self._eval_seg_knn(node, path, knns)
        if isinstance(node, Bool):
            return self._eval_seg_bool(node, path, nested_field, expansions, knns)
        raise ParseError(
            path,
            f"{type(node).__name__.lower()} clauses are not valid inside nested",
        )

    def _eval_seg_match(
        self, node: Match, path: str, expansions: list[ExpansionTrace]
    ) -> dict[SegmentKey, _SegContribution]:
        expanded_sets = []
        for term in tokenize(node.text).terms():
            expanded = expand_term(term, self.synonyms)
            expanded_sets.append(expanded)
            if len(expanded) > 1:
                expansions.append(
                    ExpansionTrace(
                        json_path=f"{path}.match",
                        field=node.field,
                        term=term,
                        expanded=tuple(sorted(expanded)),
                    )
                )
        out: dict[SegmentKey, _SegContribution] = {}
        for expanded in expanded_sets:
            keys: set[SegmentKey] = set()
            for syn in expanded:
                keys.update(self.lexical.matching_segment_keys(syn))
            for key in keys:
                best = max(self.lexical.bm25_segment_score(syn, key) for syn in expanded)
                entry = out.setdefault(key, _SegContribution(lex=0.0))
                entry.lex = (entry.lex or 0.0) + best
        return out

    def _eval_seg_knn(
        self, node: Knn, path: str, knns: list[KnnTrace]
    ) -> dict[SegmentKey, _SegContribution]:
        query_vec = self.embedder.embed(node.query_text)
        neighbors = self.vectors.knn_search(
            query_vec, node.k, ef=max(self.vectors.params.ef_search, node.k)
        )
        knns.append(
            KnnTrace(
                json_path=f"{path}.knn",
                field=node.field,
                k=node.k,
                matched=len(neighbors),
            )
        )
        return {
            (str(doc_id), int(ordinal)): _SegContribution(sem=cos)
            for (doc_id, ordinal), cos in neighbors
        }

    def _eval_seg_bool(
        self,
        node: Bool,
        path: str,
        nested_field: str,
        expansions: list[ExpansionTrace],
        knns: list[KnnTrace],
    ) -> dict[SegmentKey, _SegContribution]:
        children = {
            section: [
                self._eval_seg(
                    child,
                    f"{path}.bool.{section}[{i}]",
                    nested_field,
                    expansions,
                    knns,
                )
                for i, child in enumerate(getattr(node, section))
            ]
            for section in ("must", "should", "must_not", "filter")
        }
        anchored = bool(children["must"] or children["filter"])

        keys: Optional[set[SegmentKey]] = None
        for child in children["must"] + children["filter"]:
            child_keys = set(child)
            keys = child_keys if keys is None else keys & child_keys
        if not anchored:
            keys = set()
            for child in children["should"]:
                keys |= set(child)
            if not children["should"]:
                # pure must_not: every indexed segment is a candidate
                keys = set(self.vectors.keys)
        for child in children["must_not"]:
            keys -= set(child)

        out: dict[SegmentKey, _SegContribution] = {}
        for key in keys:
            out[key] = _SegContribution()
        for child in children["must"] + children["should"]:
            for key, contrib in child.items():
                if key not in out:
                    continue
                entry = out[key]
                if contrib.lex is not None:
                    entry.lex = (entry.lex or 0.0) + contrib.lex
                if contrib.sem is not None:
                    entry.sem = (
                        contrib.sem
                        if entry.sem is None
                        else max(entry.sem, contrib.sem)
                    )
        return out


def make_executor(
    lexical: LexicalIndex,
    vectors: HnswIndex,
    embedder: Embedder,
    synonyms: SynonymGraph,
) -> QueryExecutor:
    return QueryExecutor(lexical, vectors, embedder, synonyms)
