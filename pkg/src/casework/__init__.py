"""Investigative search workbench for email evidence.

Hybrid retrieval (keyword scoring plus approximate vector search over
segments), a strict structured query language with an audited translation
path from plain text, durable case journals, and an ablation-ready
evaluation harness.
"""

__version__ = "0.1.0"

from .engine import CaseEngine, SearchResult
from .errors import CaseworkError
from .fusion import HYBRID, LEXICAL_ONLY, MODES, SEMANTIC_ONLY, FusionConfig
from .model import Document, IndexSchema, ScoredHit, Segment, default_enron_schema
from .querydsl import Request, canonical_request_json, parse_request

__all__ = [
    "CaseEngine",
    "CaseworkError",
    "Document",
    "FusionConfig",
    "HYBRID",
    "IndexSchema",
    "LEXICAL_ONLY",
    "MODES",
    "Request",
    "ScoredHit",
    "SEMANTIC_ONLY",
    "SearchResult",
    "Segment",
    "canonical_request_json",
    "default_enron_schema",
    "parse_request",
    "__version__",
]
