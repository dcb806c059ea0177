"""Case management HTTP service.

A case groups an investigator's query sessions and document reviews over one
index. Every state change appends a JSON line to a per-kind journal
(cases.jsonl, sessions.jsonl, reviews.jsonl); startup replays the journals,
so killing the process loses nothing that was acknowledged. Sessions are
immutable once written: a follow-up query links to its parent session rather
than editing it, and the stored canonical DSL re-executes to the same ranking
because every component underneath is deterministic.

All errors leave as one envelope: {"error": {"code", "message", "details"}}.
Client mistakes (unparseable DSL, rejected audits, empty intents) map to 422,
unknown resources to 404.
"""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Request as HttpRequest
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .engine import CaseEngine
from .errors import (
    AuditReject,
    CaseworkError,
    EmptyIntent,
    NotFound,
    ParseError,
    PersistenceError,
    UntranslatableResponse,
)
from .fusion import MODES
from .querydsl import canonical_request_json, ensure_valid, parse_request
from .translate import RuleBasedTranslator, Translator, translate_and_audit

JOURNALS = ("cases.jsonl", "sessions.jsonl", "reviews.jsonl")


class CaseStore:
    """Journal-backed state for cases, sessions, and reviews."""

    def __init__(
        self,
        journal_dir: Path,
        engine: CaseEngine,
        translator: Optional[Translator] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self.engine = engine
        self.translator = translator or RuleBasedTranslator()
        self.clock = clock
        self.cases: dict[str, dict] = {}
        self.sessions: dict[str, dict[str, dict]] = {}
        self.reviews: dict[str, dict[str, dict]] = {}
        self._replay()

    # -- journals ---------------------------------------------------------------

    def _journal_path(self, name: str) -> Path:
        return self.journal_dir / name

    def _replay(self) -> None:
        for name in JOURNALS:
            path = self._journal_path(name)
            if not path.exists():
                continue
            with open(path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        record = json.loads(line)
                    except json.JSONDecodeError:
                        raise PersistenceError(
                            f"corrupt journal line {line_no} in {path}"
                        ) from None
                    self._apply(name, record)

    def _append(self, name: str, record: dict) -> None:
        with open(self._journal_path(name), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            fh.flush()
        self._apply(name, record)

    def _apply(self, name: str, record: dict) -> None:
        if name == "cases.jsonl":
            self.cases[record["case_id"]] = record
            self.sessions.setdefault(record["case_id"], {})
            self.reviews.setdefault(record["case_id"], {})
        elif name == "sessions.jsonl":
            self.sessions.setdefault(record["case_id"], {})[
                record["session_id"]
            ] = record
        elif name == "reviews.jsonl":
            self.reviews.setdefault(record["case_id"], {})[
                record["doc_id"]
            ] = record

    # -- cases -----------------------------------------------------------------

    def create_case(self, name: str) -> dict:
        case_id = f"case-{len(self.cases) + 1:04d}"
        record = {
            "case_id": case_id,
            "name": name,
            "created_at": self.clock(),
        }
        self._append("cases.jsonl", record)
        return record

    def case(self, case_id: str) -> dict:
        record = self.cases.get(case_id)
        if record is None:
            raise NotFound(f"case {case_id}")
        return record

    def list_cases(self) -> list[dict]:
        return [self.cases[cid] for cid in sorted(self.cases)]

    # -- sessions ----------------------------------------------------------------

    def run_query(
        self,
        case_id: str,
        query_text: Optional[str] = None,
        dsl: Optional[dict] = None,
        config: str = "hybrid",
        size: Optional[int] = None,
        from_: Optional[int] = None,
        parent_session_id: Optional[str] = None,
    ) -> dict:
        self.case(case_id)
        if config not in MODES:
            raise ParseError(
                "$.config", f"unknown config {config!r}; one of {sorted(MODES)}"
            )
        if parent_session_id is not None:
            if parent_session_id not in self.sessions.get(case_id, {}):
                raise NotFound(f"session {parent_session_id}")
        if (query_text is None) == (dsl is None):
            raise ParseError("$", "provide exactly one of query_text, dsl")

        corrections: list = []
        draft_obj = None
        if query_text is not None:
            outcome = translate_and_audit(
                query_text, self.translator, self.engine.schema
            )
            request = outcome.request
            translator_kind = outcome.draft.translator
            corrections = [c.to_obj() for c in outcome.report.corrections]
            draft_obj = json.loads(
                canonical_request_json(outcome.draft.request)
            )
        else:
            request = parse_request(dsl)
            ensure_valid(request, self.engine.schema)
            translator_kind = "direct"

        if size is not None or from_ is not None:
            request = dataclasses.replace(
                request,
                size=request.size if size is None else size,
                from_=request.from_ if from_ is None else from_,
            )

        result = self.engine.search(request, MODES[config])
        session_id = f"s-{len(self.sessions.get(case_id, {})) + 1:04d}"
        record = {
            "case_id": case_id,
            "session_id": session_id,
            "parent_session_id": parent_session_id,
            "created_at": self.clock(),
            "query_text": query_text,
            "translator": translator_kind,
            "config": config,
            "draft_dsl": draft_obj,
            "corrections": corrections,
            "dsl": json.loads(canonical_request_json(request)),
            "total": result.total,
            "hits": result.to_obj()["hits"],
            "trace": result.trace.to_obj(),
        }
        self._append("sessions.jsonl", record)
        return record

    def session(
        self, case_id: str, session_id: str, hide_reviewed: bool = False
    ) -> dict:
        self.case(case_id)
        record = self.sessions.get(case_id, {}).get(session_id)
        if record is None:
            raise NotFound(f"session {session_id}")
        out = dict(record)
        if hide_reviewed:
            reviewed = {
                doc_id
                for doc_id, review in self.reviews.get(case_id, {}).items()
                if review["reviewed"]
            }
            kept = [h for h in record["hits"] if h["doc_id"] not in reviewed]
            out["hits"] = kept
            out["hidden_count"] = len(record["hits"]) - len(kept)
        return out

    def list_sessions(self, case_id: str) -> list[dict]:
        self.case(case_id)
        records = self.sessions.get(case_id, {})
        return [records[sid] for sid in sorted(records)]

    # -- reviews ------------------------------------------------------------------

    def set_review(
        self, case_id: str, doc_id: str, reviewed: bool, note: str = ""
    ) -> dict:
        self.case(case_id)
        if not self.engine.has_document(doc_id):
            raise NotFound(f"document {doc_id}")
        record = {
            "case_id": case_id,
            "doc_id": doc_id,
            "reviewed": reviewed,
            "note": note,
            "updated_at": self.clock(),
        }
        self._append("reviews.jsonl", record)
        return record

    def document(self, case_id: str, doc_id: str) -> dict:
        self.case(case_id)
        record = self.engine.document(doc_id)
        review = self.reviews.get(case_id, {}).get(doc_id)
        record["review"] = (
            {"reviewed": review["reviewed"], "note": review["note"]}
            if review
            else {"reviewed": False, "note": ""}
        )
        return record

    def coverage(self, case_id: str) -> dict:
        self.case(case_id)
        retrieved: set[str] = set()
        for record in self.sessions.get(case_id, {}).values():
            retrieved.update(h["doc_id"] for h in record["hits"])
        reviewed = {
            doc_id
            for doc_id, review in self.reviews.get(case_id, {}).items()
            if review["reviewed"]
        }
        reviewed_retrieved = retrieved & reviewed
        return {
            "case_id": case_id,
            "documents_indexed": len(self.engine),
            "documents_retrieved": len(retrieved),
            "documents_reviewed": len(reviewed),
            "retrieved_reviewed": len(reviewed_retrieved),
            "review_fraction": (
                len(reviewed_retrieved) / len(retrieved) if retrieved else 0.0
            ),
        }


# -- HTTP layer ---------------------------------------------------------------------


class CreateCaseBody(BaseModel):
    name: str


class QueryBody(BaseModel):
    query_text: Optional[str] = None
    dsl: Optional[dict] = None
    config: str = "hybrid"
    size: Optional[int] = None
    from_: Optional[int] = Field(default=None, alias="from")
    parent_session_id: Optional[str] = None

    model_config = {"populate_by_name": True}


class ReviewBody(BaseModel):
    reviewed: bool
    note: str = ""


def _error_payload(code: str, message: str, details: dict) -> dict:
    return {"error": {"code": code, "message": message, "details": details}}


def _envelope_for(exc: CaseworkError) -> tuple[int, dict]:
    if isinstance(exc, NotFound):
        return 404, _error_payload("not_found", str(exc), {})
    if isinstance(exc, ParseError):
        return 422, _error_payload(
            "parse_error", exc.reason, {"json_path": exc.json_path}
        )
    if isinstance(exc, AuditReject):
        return 422, _error_payload(
            "audit_reject", exc.message, {"rule_id": exc.rule_id}
        )
    if isinstance(exc, EmptyIntent):
        return 422, _error_payload("empty_intent", str(exc), {})
    if isinstance(exc, UntranslatableResponse):
        return 422, _error_payload(
            "untranslatable_response", "translator reply unusable", {}
        )
    return 422, _error_payload(type(exc).__name__.lower(), str(exc), {})


def create_app(
    engine: CaseEngine,
    journal_dir: Path,
    translator: Optional[Translator] = None,
    clock: Callable[[], float] = time.time,
) -> FastAPI:
    """Build the HTTP app around one engine and one journal directory."""
    app = FastAPI(title="casework", version=__version__)
    # the console is typically served from a separate static origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = CaseStore(journal_dir, engine, translator=translator, clock=clock)
    app.state.store = store

    @app.exception_handler(CaseworkError)
    async def casework_error(_: HttpRequest, exc: CaseworkError):
        status, payload = _envelope_for(exc)
        return JSONResponse(status_code=status, content=payload)

    @app.exception_handler(RequestValidationError)
    async def validation_error(_: HttpRequest, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content=_error_payload(
                "validation_error", "invalid request body", {"errors": exc.errors()}
            ),
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "documents": len(store.engine)}

    @app.post("/cases", status_code=201)
    def create_case(body: CreateCaseBody):
        return store.create_case(body.name)

    @app.get("/cases")
    def list_cases():
        return {"cases": store.list_cases()}

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        return store.case(case_id)

    @app.post("/cases/{case_id}/queries", status_code=201)
    def post_query(case_id: str, body: QueryBody):
        return store.run_query(
            case_id,
            query_text=body.query_text,
            dsl=body.dsl,
            config=body.config,
            size=body.size,
            from_=body.from_,
            parent_session_id=body.parent_session_id,
        )

    @app.get("/cases/{case_id}/sessions")
    def get_sessions(case_id: str):
        return {"sessions": store.list_sessions(case_id)}

    @app.get("/cases/{case_id}/sessions/{session_id}")
    def get_session(case_id: str, session_id: str, hide_reviewed: bool = False):
        return store.session(case_id, session_id, hide_reviewed=hide_reviewed)

    @app.get("/cases/{case_id}/documents/{doc_id}")
    def get_document(case_id: str, doc_id: str):
        return store.document(case_id, doc_id)

    @app.put("/cases/{case_id}/documents/{doc_id}/review")
    def put_review(case_id: str, doc_id: str, body: ReviewBody):
        return store.set_review(case_id, doc_id, body.reviewed, body.note)

    @app.get("/cases/{case_id}/coverage")
    def get_coverage(case_id: str):
        return store.coverage(case_id)

    return app
