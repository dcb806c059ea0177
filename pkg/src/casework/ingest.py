"""Offline ingestion: raw message files to indexed documents.

The pipeline is parse, disentangle, chunk, embed, index. Each message flows
through a journaled job queue so a crashed run can resume without re-reading
acknowledged work, and indexing is idempotent on message_id: a message seen
twice (same file run twice, or the same message in two folders) indexes once
and counts as a duplicate afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .chunking import chunk_unit
from .embedding import Embedder
from .engine import CaseEngine
from .errors import CaseworkError
from .mailparse import ParsedEmail, disentangle, joined_body, parse_email, unit_offsets
from .model import Document, Segment
from .queue import JobQueue


@dataclass
class IngestReport:
    """Counts from one ingest run."""

    indexed: int = 0
    duplicates: int = 0
    segments: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "indexed": self.indexed,
            "duplicates": self.duplicates,
            "segments": self.segments,
            "failures": [{"source": s, "error": e} for s, e in self.failures],
        }


def build_segments(units: list[str], embedder: Embedder) -> list[Segment]:
    """Chunk each unit and embed the verbatim chunk text.

    Ordinals run across the whole document; char spans index into the joined
    disentangled body.
    """
    segments = []
    offsets = unit_offsets(units)
    ordinal = 0
    for unit, base in zip(units, offsets):
        for span in chunk_unit(unit):
            text = unit[span.start : span.end]
            segments.append(
                Segment(
                    segment_ordinal=ordinal,
                    segment_text=text,
                    segment_vector=embedder.embed(text),
                    char_span=(base + span.start, base + span.end),
                )
            )
            ordinal += 1
    return segments


def email_to_document(parsed: ParsedEmail, embedder: Embedder) -> Document:
    """Assemble the indexable document for one parsed message."""
    units = disentangle(parsed.body)
    body = joined_body(units)
    segments = build_segments(units, embedder)
    fields = {
        "message_id": parsed.message_id,
        "sender": parsed.sender,
        "recipients": list(parsed.recipients),
        "people": list(parsed.people),
        "subject": parsed.subject,
        "body": body,
        "sent_date": parsed.sent_date,
        "folder": parsed.folder,
        "x_headers": [f"{k}: {v}" for k, v in parsed.x_headers.items()],
    }
    return Document(
        doc_id=parsed.message_id,
        fields=fields,
        segments=tuple(segments),
        source_uri=parsed.source_uri,
    )


def ingest_message(engine: CaseEngine, raw: bytes, source_uri: str = "") -> bool:
    """Parse and index one message; returns False for an already-known id."""
    parsed = parse_email(raw, source_uri=source_uri)
    if engine.has_document(parsed.message_id):
        return False
    engine.add_document(email_to_document(parsed, engine.embedder))
    return True


def ingest_messages(
    engine: CaseEngine, messages: Iterable[tuple[bytes, str]]
) -> IngestReport:
    """Index an in-memory batch; failures are recorded, not raised."""
    report = IngestReport()
    for raw, source_uri in messages:
        try:
            before = len(engine.vectors)
            if ingest_message(engine, raw, source_uri):
                report.indexed += 1
                report.segments += len(engine.vectors) - before
            else:
                report.duplicates += 1
        except CaseworkError as exc:
            report.failures.append((source_uri, str(exc)))
    return report


def message_files(directory: Path) -> list[Path]:
    """All regular files under a directory, in stable sorted order."""
    directory = Path(directory)
    return sorted(p for p in directory.rglob("*") if p.is_file())


def ingest_directory(
    engine: CaseEngine,
    directory: Path,
    queue_dir: Optional[Path] = None,
) -> IngestReport:
    """Queue every file under the directory, then drain the queue.

    Rerunning over the same tree is a no-op for already-acknowledged files:
    their enqueues are rejected as duplicates and indexed message_ids are
    skipped.
    """
    directory = Path(directory)
    queue = JobQueue(queue_dir if queue_dir is not None else directory.parent / "queue")
    for path in message_files(directory):
        queue.enqueue(str(path.relative_to(directory)), {"path": str(path)})

    report = IngestReport()
    while True:
        job = queue.claim()
        if job is None:
            break
        path = Path(job.payload["path"])
        try:
            raw = path.read_bytes()
            before = len(engine.vectors)
            if ingest_message(engine, raw, source_uri=str(path)):
                report.indexed += 1
                report.segments += len(engine.vectors) - before
            else:
                report.duplicates += 1
            queue.ack(job.job_id)
        except CaseworkError as exc:
            report.failures.append((str(path), str(exc)))
            queue.ack(job.job_id)
        except OSError as exc:
            queue.fail(job.job_id, str(exc))
            report.failures.append((str(path), str(exc)))
    return report
