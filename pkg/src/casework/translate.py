"""Natural-language request translation and the structural audit gate.

Two translators produce candidate queries. The rule-based one runs a small
deterministic grammar over the request text: quoted phrases become match
clauses, ``from:``/``to:`` prefixes become sender/recipient filters,
``before:``/``after:`` dates become ranges, bare email addresses and
capitalized name pairs become people filters, and whatever remains is
searched both lexically and semantically. The remote one sends a versioned
prompt to an HTTP text-completion endpoint and parses the last fenced JSON
block of the reply, retrying once with the parse error quoted.

Whatever the source, a candidate query never reaches the index unaudited.
The auditor is a deterministic rule engine, not a model: unknown fields and
type conflicts reject outright, while repairable shapes are rewritten as
atomic subtree replacements that are recorded and replayable. The fixed
repertoire:

R1  unknown field anywhere                    -> reject
R2  clause/field type conflict                -> reject
R3  person entity inside knn query_text       -> term filter + residual knn
R4  ISO date inside knn query_text            -> same-day range + residual knn
R5  segment field outside a nested clause     -> wrap in nested

Each correction names the rule, the JSON path it replaced, and the
replacement subtree; replaying them in order against the original request
reproduces the audited query exactly.
"""

from __future__ import annotations

import copy
import importlib.resources
import json
import re
from dataclasses import dataclass
from typing import Optional, Protocol

import httpx

from .errors import (
    AuditReject,
    EmptyIntent,
    ParseError,
    TranslatorUnavailable,
    UntranslatableResponse,
)
from .model import IndexSchema
from .querydsl import (
    Bool,
    Knn,
    Match,
    Nested,
    Query,
    Range,
    Request,
    Term,
    get_at_path,
    parse_request,
    request_to_obj,
    set_at_path,
    validate_request,
)

PROMPT_VERSION = 1
DEFAULT_KNN_K = 100

EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
NAME_PAIR_RE = re.compile(r"\b[A-Z][a-z]+ [A-Z][a-z]+\b")
ISO_DATE_RE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")
QUOTED_RE = re.compile(r'"([^"]+)"')
PREFIX_RE = re.compile(r"\b(from|to|before|after):(\S+)")
FENCED_JSON_RE = re.compile(r"```json\s*\n(.*?)```", re.DOTALL)

# words that only wire entities into a sentence; dropped from residual text
CONNECTOR_WORDS = frozenset(
    "from to by with between involving about on at in during since until "
    "before after".split()
)


def _strip_connectors(text: str) -> str:
    kept = [w for w in text.split() if w.lower() not in CONNECTOR_WORDS]
    return " ".join(kept)


def _blank_span(text: str, start: int, end: int) -> str:
    return text[:start] + " " * (end - start) + text[end:]


# -- prompt ------------------------------------------------------------------


def _grammar_text() -> str:
    return (
        importlib.resources.files("casework")
        .joinpath("dsl.schema.json")
        .read_text(encoding="utf-8")
        .strip()
    )


def _template_text() -> str:
    return (
        importlib.resources.files("casework")
        .joinpath("prompts/architect.txt")
        .read_text(encoding="utf-8")
    )


def build_prompt(query_text: str, schema: IndexSchema) -> str:
    """The full completion prompt: schema, grammar, and the request text.

    Nothing from the corpus is ever interpolated here; the prompt is a pure
    function of the schema and the investigator's own words.
    """
    return _template_text().format(
        schema_json=schema.to_json(),
        grammar=_grammar_text(),
        query_text=query_text.strip(),
    )


# -- translators ---------------------------------------------------------------


@dataclass(frozen=True)
class TranslationDraft:
    """Untrusted output of a translator, before the audit."""

    request: Request
    translator: str
    prompt_version: int = PROMPT_VERSION
    raw_reply: str = ""
    retried: bool = False


class Translator(Protocol):
    kind: str

    def translate(self, query_text: str, schema: IndexSchema) -> TranslationDraft: ...


def _semantic_pieces(residual: str) -> Query:
    return Bool(
        should=(
            Match("body", residual),
            Nested(
                "segments",
                Knn("segments.segment_vector", residual, DEFAULT_KNN_K),
            ),
        )
    )


class RuleBasedTranslator:
    """Deterministic fallback grammar; no network, no model."""

    kind = "rules"

    def translate(self, query_text: str, schema: IndexSchema) -> TranslationDraft:
        working = query_text
        pieces: list[Query] = []

        for match in QUOTED_RE.finditer(working):
            phrase = match.group(1).strip()
            if phrase:
                pieces.append(Match("body", phrase))
        working = QUOTED_RE.sub(lambda m: " " * len(m.group(0)), working)

        for match in PREFIX_RE.finditer(working):
            prefix, value = match.group(1).lower(), match.group(2)
            if prefix == "from":
                pieces.append(Term("sender", value.lower()))
            elif prefix == "to":
                pieces.append(Term("recipients", value.lower()))
            elif prefix == "before":
                if ISO_DATE_RE.fullmatch(value):
                    pieces.append(Range("sent_date", lte=value))
            elif prefix == "after":
                if ISO_DATE_RE.fullmatch(value):
                    pieces.append(Range("sent_date", gte=value))
        working = PREFIX_RE.sub(lambda m: " " * len(m.group(0)), working)

        for match in EMAIL_RE.finditer(working):
            pieces.append(Term("people", match.group(0).lower()))
        working = EMAIL_RE.sub(lambda m: " " * len(m.group(0)), working)

        for match in NAME_PAIR_RE.finditer(working):
            pieces.append(Term("people", match.group(0)))
        working = NAME_PAIR_RE.sub(lambda m: " " * len(m.group(0)), working)

        residual = _strip_connectors(" ".join(working.split()))
        if residual:
            pieces.append(_semantic_pieces(residual))

        if not pieces:
            raise EmptyIntent(f"nothing searchable in {query_text!r}")
        query = pieces[0] if len(pieces) == 1 else Bool(must=tuple(pieces))
        return TranslationDraft(request=Request(query=query), translator=self.kind)


class RemoteTranslator:
    """HTTP text-completion client.

    Wire format: POST {"prompt": str, "max_tokens": int} -> {"text": str}.
    The reply's last fenced json block is taken as the candidate request.
    One retry is allowed, with the failure reason quoted back to the model.
    """

    kind = "remote"

    def __init__(
        self,
        url: str,
        client: Optional[httpx.Client] = None,
        timeout_ms: int = 20_000,
        max_tokens: int = 800,
    ):
        self.url = url
        self.max_tokens = max_tokens
        self._client = client or httpx.Client(timeout=timeout_ms / 1000.0)

    def _complete(self, prompt: str) -> str:
        try:
            response = self._client.post(
                self.url, json={"prompt": prompt, "max_tokens": self.max_tokens}
            )
            response.raise_for_status()
            body = response.json()
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            raise TranslatorUnavailable(str(exc)) from exc
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str):
            raise TranslatorUnavailable("reply carries no text field")
        return text

    @staticmethod
    def _extract_request(reply: str) -> Request:
        blocks = FENCED_JSON_RE.findall(reply)
        if not blocks:
            raise ParseError("$", "reply contains no fenced json block")
        return parse_request(blocks[-1])

    def translate(self, query_text: str, schema: IndexSchema) -> TranslationDraft:
        prompt = build_prompt(query_text, schema)
        reply = self._complete(prompt)
        try:
            request = self._extract_request(reply)
            return TranslationDraft(
                request=request, translator=self.kind, raw_reply=reply
            )
        except ParseError as exc:
            retry_prompt = (
                f"{prompt}\n\nYour previous reply could not be used "
                f"(at {exc.json_path}: {exc.reason}). "
                "Reply again with exactly one fenced json block."
            )
            reply = self._complete(retry_prompt)
            try:
                request = self._extract_request(reply)
            except ParseError as retry_exc:
                raise UntranslatableResponse(
                    f"no usable query after retry: {retry_exc.reason}",
                    raw_reply=reply,
                ) from None
            return TranslationDraft(
                request=request, translator=self.kind, raw_reply=reply, retried=True
            )


# -- audit -------------------------------------------------------------------------


@dataclass(frozen=True)
class Correction:
    """One atomic rewrite: replace the subtree at json_path."""

    rule_id: str
    json_path: str
    replacement: dict
    note: str

    def to_obj(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "json_path": self.json_path,
            "replacement": self.replacement,
            "note": self.note,
        }


@dataclass(frozen=True)
class AuditReport:
    """Audited request plus the corrections that produced it."""

    request: Request
    corrections: tuple[Correction, ...] = ()

    def to_obj(self) -> dict:
        return {
            "request": request_to_obj(self.request),
            "corrections": [c.to_obj() for c in self.corrections],
        }


def _clause_object_path(violation_path: str) -> str:
    """Path of the query object enclosing a violation reported on its clause.

    The validator reports ``$.query.bool.must[0].match``; the rewrite target
    is the object holding the clause key, ``$.query.bool.must[0]``.
    """
    for key in ("match", "term", "range", "knn", "nested"):
        suffix = f".{key}"
        if violation_path.endswith(suffix):
            return violation_path[: -len(suffix)]
    return violation_path


def _extract_entities(text: str) -> tuple[list[str], list[str], str]:
    """Pull emails and name pairs out of knn text until none remain.

    Returns (emails, names, residual). Extraction iterates to a fixed point
    because removing tokens can make previously separated capitalized words
    adjacent.
    """
    emails = []
    working = text
    while True:
        match = EMAIL_RE.search(working)
        if not match:
            break
        emails.append(match.group(0).lower())
        working = _blank_span(working, match.start(), match.end())
    working = _strip_connectors(" ".join(working.split()))
    names = []
    while True:
        match = NAME_PAIR_RE.search(working)
        if not match:
            break
        names.append(match.group(0))
        working = " ".join(
            _blank_span(working, match.start(), match.end()).split()
        )
    return emails, names, working.strip()


def _extract_dates(text: str) -> tuple[list[str], str]:
    dates = ISO_DATE_RE.findall(text)
    if not dates:
        return [], text
    working = ISO_DATE_RE.sub(" ", text)
    working = _strip_connectors(" ".join(working.split()))
    return dates, working.strip()


def _email_field(email: str, query_text: str) -> str:
    """people, unless the investigator's own words put 'from' right before it."""
    idx = query_text.lower().find(email)
    if idx > 0:
        before = query_text[:idx].split()
        if before and before[-1].lower() in ("from", "from:"):
            return "sender"
    return "people"


class Auditor:
    """Deterministic repair-or-reject gate between translators and the index."""

    def __init__(self, schema: IndexSchema):
        self.schema = schema

    def audit(self, request: Request, query_text: str = "") -> AuditReport:
        obj = request_to_obj(request)
        corrections: list[Correction] = []
        for _ in range(64):
            fix = self._next_fix(obj, query_text)
            if fix is None:
                break
            corrections.append(fix)
            # apply a copy so later fixes cannot mutate the recorded subtree
            set_at_path(obj, fix.json_path, copy.deepcopy(fix.replacement))
        else:
            raise AuditReject("audit", "correction budget exhausted")

        final = parse_request(obj)
        remaining = validate_request(final, self.schema)
        if remaining:
            first = remaining[0]
            rule = "R1" if first.code == "unknown_field" else "R2"
            raise AuditReject(
                rule, f"{first.message} (at {first.json_path})"
            )
        return AuditReport(request=final, corrections=tuple(corrections))

    # -- fix discovery ------------------------------------------------------

    def _next_fix(self, obj: dict, query_text: str) -> Optional[Correction]:
        request = parse_request(obj)
        violations = validate_request(request, self.schema)
        for violation in violations:
            if violation.code == "unknown_field":
                raise AuditReject(
                    "R1", f"{violation.message} (at {violation.json_path})"
                )
        for violation in violations:
            if violation.code == "nested_misuse":
                fix = self._wrap_in_nested(obj, violation.json_path)
                if fix is not None:
                    return fix
        for violation in violations:
            if violation.code == "type_mismatch":
                raise AuditReject(
                    "R2", f"{violation.message} (at {violation.json_path})"
                )
        return self._next_knn_fix(obj, query_text)

    def _wrap_in_nested(self, obj: dict, violation_path: str) -> Optional[Correction]:
        if ".nested." in violation_path:
            # misuse inside an existing nested clause is not wrappable
            return None
        clause_path = _clause_object_path(violation_path)
        clause = get_at_path(obj, clause_path)
        if "nested" in clause:
            return None
        nested_path = self.schema.nested_field()
        if nested_path is None:
            return None
        replacement = {"nested": {"path": nested_path, "query": clause}}
        return Correction(
            rule_id="R5",
            json_path=clause_path,
            replacement=replacement,
            note="segment-scoped clause wrapped in nested",
        )

    def _iter_knn_paths(self, node: dict, path: str) -> list[tuple[str, dict]]:
        """(path, clause object) for every query object whose key is knn or
        whose nested query leads to one, in document order."""
        found = []
        if "knn" in node:
            found.append((path, node))
        if "nested" in node:
            found.extend(
                self._iter_knn_paths(node["nested"]["query"], f"{path}.nested.query")
            )
        if "bool" in node:
            for section in ("must", "should", "must_not", "filter"):
                for i, child in enumerate(node["bool"].get(section, [])):
                    found.extend(
                        self._iter_knn_paths(child, f"{path}.bool.{section}[{i}]")
                    )
        return found

    def _enclosing_nested(self, obj: dict, knn_path: str) -> tuple[str, dict]:
        """The nested clause object wrapping a knn, for subtree replacement."""
        suffix = ".nested.query"
        if knn_path.endswith(suffix):
            parent = knn_path[: -len(suffix)]
            return parent, get_at_path(obj, parent)
        return knn_path, get_at_path(obj, knn_path)

    def _next_knn_fix(self, obj: dict, query_text: str) -> Optional[Correction]:
        for knn_path, clause in self._iter_knn_paths(obj["query"], "$.query"):
            spec = clause["knn"]
            vector_field = next(iter(spec))
            text = spec[vector_field]["query_text"]
            k = spec[vector_field].get("k", DEFAULT_KNN_K)

            emails, names, residual = _extract_entities(text)
            if emails or names:
                return self._entity_fix(
                    obj, knn_path, vector_field, k, emails, names, residual, query_text
                )
            dates, residual = _extract_dates(text)
            if dates:
                return self._date_fix(obj, knn_path, vector_field, k, dates, residual)
        return None

    def _rebuild_clause(
        self,
        anchor_clause: dict,
        knn_path: str,
        anchor_path: str,
        vector_field: str,
        k: int,
        residual: str,
        extra_clauses: list[dict],
    ) -> dict:
        """Bool(must=[extras..., residual knn]) or just the extras."""
        parts = list(extra_clauses)
        if residual:
            new_knn = {"knn": {vector_field: {"query_text": residual, "k": k}}}
            if anchor_path != knn_path:
                parts.append(
                    {
                        "nested": {
                            "path": anchor_clause["nested"]["path"],
                            "query": new_knn,
                        }
                    }
                )
            else:
                parts.append(new_knn)
        if len(parts) == 1:
            return parts[0]
        return {"bool": {"must": parts}}

    def _entity_fix(
        self,
        obj: dict,
        knn_path: str,
        vector_field: str,
        k: int,
        emails: list[str],
        names: list[str],
        residual: str,
        query_text: str,
    ) -> Correction:
        anchor_path, anchor_clause = self._enclosing_nested(obj, knn_path)
        extras = []
        for email in emails:
            extras.append({"term": {_email_field(email, query_text): email}})
        for name in names:
            extras.append({"term": {"people": name}})
        replacement = self._rebuild_clause(
            anchor_clause, knn_path, anchor_path, vector_field, k, residual, extras
        )
        moved = ", ".join(emails + names)
        return Correction(
            rule_id="R3",
            json_path=anchor_path,
            replacement=replacement,
            note=f"person reference moved out of knn: {moved}",
        )

    def _date_fix(
        self,
        obj: dict,
        knn_path: str,
        vector_field: str,
        k: int,
        dates: list[str],
        residual: str,
    ) -> Correction:
        anchor_path, anchor_clause = self._enclosing_nested(obj, knn_path)
        extras = [
            {"range": {"sent_date": {"gte": min(dates), "lte": max(dates)}}}
        ]
        replacement = self._rebuild_clause(
            anchor_clause, knn_path, anchor_path, vector_field, k, residual, extras
        )
        return Correction(
            rule_id="R4",
            json_path=anchor_path,
            replacement=replacement,
            note=f"date moved out of knn: {', '.join(sorted(set(dates)))}",
        )


def replay_corrections(request: Request, corrections: list[Correction]) -> Request:
    """Apply recorded corrections to the original request, in order."""
    obj = request_to_obj(request)
    for correction in corrections:
        set_at_path(obj, correction.json_path, correction.replacement)
    return parse_request(obj)


# -- pipeline -----------------------------------------------------------------


@dataclass(frozen=True)
class TranslationOutcome:
    """Draft, audit trail, and the final executable request."""

    query_text: str
    draft: TranslationDraft
    report: AuditReport

    @property
    def request(self) -> Request:
        return self.report.request

    def to_obj(self) -> dict:
        return {
            "query_text": self.query_text,
            "translator": self.draft.translator,
            "prompt_version": self.draft.prompt_version,
            "retried": self.draft.retried,
            "draft_request": request_to_obj(self.draft.request),
            "corrections": [c.to_obj() for c in self.report.corrections],
            "final_request": request_to_obj(self.report.request),
        }


def translate_and_audit(
    query_text: str, translator: Translator, schema: IndexSchema
) -> TranslationOutcome:
    """The only sanctioned path from text to an executable request."""
    if not query_text.strip():
        raise EmptyIntent("empty request text")
    draft = translator.translate(query_text, schema)
    auditor = Auditor(schema)
    report = auditor.audit(draft.request, query_text=query_text)
    return TranslationOutcome(query_text=query_text, draft=draft, report=report)
