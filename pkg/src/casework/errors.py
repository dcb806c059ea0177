"""Exception types shared across the engine."""

from __future__ import annotations


class CaseworkError(Exception):
    """Base class for all casework errors."""


class SchemaMismatch(CaseworkError):
    """Document does not validate against the active schema."""


class DuplicateDocument(CaseworkError):
    """doc_id already present in the index."""


class UnknownField(CaseworkError):
    """Query references a field the schema does not define."""


class DuplicateSegment(CaseworkError):
    """(doc_id, segment_ordinal) key already present in the vector index."""


class InvalidVector(CaseworkError):
    """Vector violates the unit-norm or dimensionality contract."""


class DimensionMismatch(CaseworkError):
    """Vector has the wrong number of components."""


class EmbedderUnavailable(CaseworkError):
    """Remote embedding endpoint unreachable; the caller may retry."""


class TranslatorUnavailable(CaseworkError):
    """Remote translation endpoint unreachable."""


class UntranslatableResponse(CaseworkError):
    """Remote translator failed to produce a parseable query after retry.

    Carries the raw model reply so the user can inspect it; the reply is
    never executed.
    """

    def __init__(self, message: str, raw_reply: str = ""):
        super().__init__(message)
        self.raw_reply = raw_reply


class EmptyIntent(CaseworkError):
    """Natural-language query reduced to nothing actionable."""


class ParseError(CaseworkError):
    """Strict DSL parse failure, qualified by a JSON path."""

    def __init__(self, json_path: str, reason: str):
        super().__init__(f"{json_path}: {reason}")
        self.json_path = json_path
        self.reason = reason


class InvalidFusionConfig(CaseworkError):
    """Fusion configuration violates its invariants."""


class MalformedMessage(CaseworkError):
    """Raw message bytes could not be parsed into headers + body."""


class QueueUnavailable(CaseworkError):
    """Job queue journal cannot be read or written."""


class SynonymLoadError(CaseworkError):
    """Synonym source is malformed (multi-word entry, overlap, short group)."""


class AuditReject(CaseworkError):
    """The auditor rejected a generated query; surfaced for manual refinement."""

    def __init__(self, rule_id: str, message: str):
        super().__init__(f"{rule_id}: {message}")
        self.rule_id = rule_id
        self.message = message


class PersistenceError(CaseworkError):
    """Index directory is missing, corrupt, or has a mismatched format version."""


class NotFound(CaseworkError):
    """Referenced case, session, or document does not exist."""
