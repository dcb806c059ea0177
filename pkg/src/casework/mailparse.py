"""Email parsing and reply-chain disentanglement.

Parsing leans on the stdlib ``email`` package for header decoding, address
extraction, and MIME body walking. What this module adds is the evidentiary
bookkeeping: a stable message_id even when the header is missing (hash of the
source bytes), normalized UTC timestamps, a people roster merging display
names with addresses, and the X- header block kept separate from the core
fields so extension metadata never silently collides with schema fields.

Disentanglement splits a body into units at quoted-reply markers (the
"-----Original Message-----" separator and dash-framed "Forwarded by"
banners), strips embedded header blocks and "> " quoting, and rejoins the
units with blank lines. Downstream chunking offsets point into that rejoined
body.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import timezone
from email import message_from_bytes, utils as email_utils
from email.message import Message

from .errors import MalformedMessage

CORE_HEADERS = ("from", "to", "cc", "subject", "date", "message-id")

_ORIGINAL_RE = re.compile(r"^\s*-{3,}\s*Original Message\s*-{3,}\s*$", re.IGNORECASE)
_FORWARD_RE = re.compile(r"^\s*-{2,}.*Forwarded by.*-{2,}\s*$", re.IGNORECASE)
_EMBEDDED_HEADER_RE = re.compile(
    r"^\s*(From|Sent|To|Cc|Bcc|Subject|Date):\s", re.IGNORECASE
)
_QUOTE_PREFIX_RE = re.compile(r"^>+ ?")


@dataclass(frozen=True)
class ParsedEmail:
    """Header fields and cleaned body of one source message."""

    message_id: str
    sender: str
    recipients: tuple[str, ...]
    people: tuple[str, ...]
    subject: str
    sent_date: str
    folder: str
    x_headers: dict[str, str] = field(default_factory=dict)
    body: str = ""
    source_uri: str = ""


def _fallback_message_id(raw: bytes) -> str:
    return "generated-" + hashlib.sha256(raw).hexdigest()[:32]


def _clean_address(name: str, addr: str) -> tuple[str, str]:
    name = " ".join(name.replace('"', " ").split())
    return name, addr.strip().lower()


def _iso_utc(date_header: str) -> str:
    try:
        parsed = email_utils.parsedate_to_datetime(date_header)
    except (ValueError, TypeError):
        return ""
    if parsed is None:
        return ""
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    try:
        parsed = parsed.astimezone(timezone.utc)
    except (ValueError, OverflowError):
        return ""
    return parsed.strftime("%Y-%m-%dT%H:%M:%SZ")


def _body_text(msg: Message) -> str:
    if msg.is_multipart():
        parts = []
        for part in msg.walk():
            if part.get_content_type() == "text/plain" and not part.is_multipart():
                parts.append(_decoded_payload(part))
        return "\n".join(p for p in parts if p)
    return _decoded_payload(msg)


def _decoded_payload(msg: Message) -> str:
    payload = msg.get_payload(decode=True)
    if payload is None:
        raw = msg.get_payload()
        return raw if isinstance(raw, str) else ""
    charset = msg.get_content_charset() or "utf-8"
    try:
        return payload.decode(charset, errors="replace")
    except LookupError:
        return payload.decode("utf-8", errors="replace")


def parse_email(raw: bytes, source_uri: str = "") -> ParsedEmail:
    """Parse one RFC-822 message; raises MalformedMessage when no recognized
    header is present at all."""
    msg = message_from_bytes(raw)
    present = {k.lower() for k in msg.keys()}
    if not present & set(CORE_HEADERS):
        raise MalformedMessage(
            f"no recognized headers in {source_uri or '<bytes>'}"
        )

    message_id = (msg.get("Message-ID") or "").strip().strip("<>")
    if not message_id:
        message_id = _fallback_message_id(raw)

    sender = ""
    people: list[str] = []
    from_pairs = email_utils.getaddresses(msg.get_all("From", []))
    if from_pairs:
        name, addr = _clean_address(*from_pairs[0])
        sender = addr or name
        for person in (name, addr):
            if person and person not in people:
                people.append(person)

    recipients: list[str] = []
    for header in ("To", "Cc"):
        for name, addr in email_utils.getaddresses(msg.get_all(header, [])):
            name, addr = _clean_address(name, addr)
            if addr and addr not in recipients:
                recipients.append(addr)
            for person in (name, addr):
                if person and person not in people:
                    people.append(person)

    x_headers = {}
    for key, value in msg.items():
        if key.lower().startswith("x-"):
            x_headers[key] = " ".join(str(value).split())

    folder = x_headers.get("X-Folder", "")

    return ParsedEmail(
        message_id=message_id,
        sender=sender,
        recipients=tuple(recipients),
        people=tuple(sorted(people)),
        subject=(msg.get("Subject") or "").strip(),
        sent_date=_iso_utc(msg.get("Date") or ""),
        folder=folder,
        x_headers=x_headers,
        body=_body_text(msg),
        source_uri=source_uri,
    )


# -- disentanglement -----------------------------------------------------------


def _is_boundary(line: str) -> bool:
    return bool(_ORIGINAL_RE.match(line) or _FORWARD_RE.match(line))


def _strip_unit(lines: list[str]) -> list[str]:
    """Remove embedded header-block runs and quoting prefixes."""
    cleaned: list[str] = []
    i = 0
    while i < len(lines):
        line = _QUOTE_PREFIX_RE.sub("", lines[i])
        if _EMBEDDED_HEADER_RE.match(line):
            # swallow the whole run of consecutive header-looking lines,
            # including continuation lines indented under them
            j = i
            while j < len(lines):
                candidate = _QUOTE_PREFIX_RE.sub("", lines[j])
                if _EMBEDDED_HEADER_RE.match(candidate):
                    j += 1
                    while j < len(lines) and lines[j][:1] in ("\t", " ") and lines[j].strip():
                        j += 1
                else:
                    break
            i = j
            continue
        cleaned.append(line)
        i += 1
    # trim leading/trailing blank lines
    while cleaned and not cleaned[0].strip():
        cleaned.pop(0)
    while cleaned and not cleaned[-1].strip():
        cleaned.pop()
    return cleaned


def disentangle(body: str) -> list[str]:
    """Split a body into cleaned units, earliest-visible first.

    The top of the message is unit 0; each quoted reply or forward that
    follows becomes its own unit. Empty units are dropped.
    """
    lines = body.splitlines()
    raw_units: list[list[str]] = [[]]
    for line in lines:
        if _is_boundary(line):
            raw_units.append([])
        else:
            raw_units[-1].append(line)
    units = []
    for raw in raw_units:
        cleaned = _strip_unit(raw)
        if cleaned:
            units.append("\n".join(cleaned))
    return units


def joined_body(units: list[str]) -> str:
    """The canonical disentangled body; chunk spans index into this string."""
    return "\n\n".join(units)


def unit_offsets(units: list[str]) -> list[int]:
    """Start offset of each unit inside joined_body(units)."""
    offsets = []
    pos = 0
    for unit in units:
        offsets.append(pos)
        pos += len(unit) + 2
    return offsets
