"""Score fusion across the lexical and semantic channels.

Each channel is min-max normalized over the candidate pool, then combined as
a weighted sum. Normalization makes the two channels commensurable: BM25
sums are unbounded while cosines live in [-1, 1], so raw addition would let
one channel silently dominate. Min-max is also scale-free, which is what
makes rankings invariant when a channel's raw scores are multiplied by a
positive constant.

Rules fixed here and relied on elsewhere:

* a document absent from a channel gets normalized score 0.0 in it;
* a degenerate channel (all pooled values equal) normalizes to 1.0 when the
  shared value is positive, else 0.0;
* a channel with weight 0 contributes no candidates, so a weight pair like
  (1, 0) reproduces the pure lexical ranking exactly, membership and order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import InvalidFusionConfig
from .model import ScoredHit

DEFAULT_CANDIDATE_POOL = 1000


@dataclass(frozen=True)
class FusionConfig:
    """Weight pair plus pool bound; weights are renormalized to sum to 1."""

    name: str
    lexical_weight: float
    semantic_weight: float
    candidate_pool: int = DEFAULT_CANDIDATE_POOL

    def __post_init__(self):
        if self.lexical_weight < 0 or self.semantic_weight < 0:
            raise InvalidFusionConfig("weights must be non-negative")
        total = self.lexical_weight + self.semantic_weight
        if total <= 0:
            raise InvalidFusionConfig("at least one weight must be positive")
        if self.candidate_pool < 1:
            raise InvalidFusionConfig("candidate_pool must be >= 1")

    @property
    def weights(self) -> tuple[float, float]:
        total = self.lexical_weight + self.semantic_weight
        return self.lexical_weight / total, self.semantic_weight / total


LEXICAL_ONLY = FusionConfig("lexical_only", 1.0, 0.0)
SEMANTIC_ONLY = FusionConfig("semantic_only", 0.0, 1.0)
HYBRID = FusionConfig("hybrid", 0.5, 0.5)

MODES = {cfg.name: cfg for cfg in (LEXICAL_ONLY, SEMANTIC_ONLY, HYBRID)}


def _minmax(values: dict[str, float]) -> dict[str, float]:
    if not values:
        return {}
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        norm = 1.0 if hi > 0 else 0.0
        return {doc_id: norm for doc_id in values}
    span = hi - lo
    return {doc_id: (v - lo) / span for doc_id, v in values.items()}


def fuse(hits: list[ScoredHit], config: FusionConfig) -> list[ScoredHit]:
    """Ranked hits with fused_score set; order is (-fused, doc_id)."""
    w_lex, w_sem = config.weights

    pool = []
    for hit in hits:
        if w_sem == 0.0 and hit.lexical_score is None:
            continue
        if w_lex == 0.0 and hit.semantic_score is None:
            continue
        pool.append(hit)

    if len(pool) > config.candidate_pool:
        keep: set[str] = set()
        by_lex = sorted(
            (h for h in pool if h.lexical_score is not None),
            key=lambda h: (-h.lexical_score, h.doc_id),
        )
        by_sem = sorted(
            (h for h in pool if h.semantic_score is not None),
            key=lambda h: (-h.semantic_score, h.doc_id),
        )
        keep.update(h.doc_id for h in by_lex[: config.candidate_pool])
        keep.update(h.doc_id for h in by_sem[: config.candidate_pool])
        pool = [h for h in pool if h.doc_id in keep]

    lex_norm = _minmax(
        {h.doc_id: h.lexical_score for h in pool if h.lexical_score is not None}
    )
    sem_norm = _minmax(
        {h.doc_id: h.semantic_score for h in pool if h.semantic_score is not None}
    )

    fused = []
    for hit in pool:
        score = w_lex * lex_norm.get(hit.doc_id, 0.0) + w_sem * sem_norm.get(
            hit.doc_id, 0.0
        )
        fused.append(dataclasses.replace(hit, fused_score=score))
    fused.sort(key=lambda h: (-h.fused_score, h.doc_id))
    return fused


def rank_of(hits: list[ScoredHit]) -> dict[str, int]:
    """Contiguous 1-based ranks in fused order."""
    return {hit.doc_id: i + 1 for i, hit in enumerate(hits)}
