"""Segmentation of disentangled bodies into embedding-sized chunks.

A unit is first split into blocks at structural boundaries (blank lines,
leading timestamps like ``9:30`` or ``14.05``, and speaker labels such as
``Jeff:``), then adjacent blocks are merged greedily until the running chunk
reaches the word target. Chunks that still exceed the hard cap are split at a
sentence end inside the final stretch, or mid-text as a last resort.

Spans tile their unit exactly: sorted by start, they partition
``[0, len(text))`` with no gaps or overlaps, and the chunk text is always the
verbatim slice ``text[start:end]``. Offsets into the full document body are
obtained by adding the unit's offset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TARGET_WORDS = 200
MAX_WORDS = 400
SENTENCE_LOOKBACK_WORDS = 50

_TIMESTAMP_RE = re.compile(r"^\d{1,2}[:.]\d{2}")
_SPEAKER_RE = re.compile(r"^[A-Z][A-Za-z .'\-]{0,40}:")
_WORD_RE = re.compile(r"\S+")
_SENTENCE_END_RE = re.compile(r"[.!?][\"')\]]*(?=\s)")


@dataclass(frozen=True)
class ChunkSpan:
    """Half-open [start, end) character range within one unit."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


def _is_boundary_line(line: str) -> bool:
    if not line.strip():
        return True
    return bool(_TIMESTAMP_RE.match(line) or _SPEAKER_RE.match(line))


def _block_starts(text: str) -> list[int]:
    """Offsets where a new block begins; always includes 0."""
    starts = [0]
    offset = 0
    for line in text.splitlines(keepends=True):
        if offset != 0 and _is_boundary_line(line.rstrip("\n")):
            starts.append(offset)
        offset += len(line)
    return starts


def _word_count(text: str) -> int:
    return len(_WORD_RE.findall(text))


def _split_oversized(text: str, start: int, end: int) -> list[ChunkSpan]:
    """Split [start, end) so no piece exceeds MAX_WORDS."""
    spans = []
    cursor = start
    while cursor < end:
        words = list(_WORD_RE.finditer(text, cursor, end))
        if len(words) <= MAX_WORDS:
            spans.append(ChunkSpan(cursor, end))
            break
        hard_cut = words[MAX_WORDS - 1].end()
        window_start = words[MAX_WORDS - SENTENCE_LOOKBACK_WORDS].start()
        cut = hard_cut
        for match in _SENTENCE_END_RE.finditer(text, window_start, hard_cut):
            cut = match.end()
        # advance past whitespace so the next span starts on a word
        while cut < end and text[cut].isspace():
            cut += 1
        if cut <= cursor or cut >= end:
            spans.append(ChunkSpan(cursor, end))
            break
        spans.append(ChunkSpan(cursor, cut))
        cursor = cut
    return spans


def chunk_unit(text: str) -> list[ChunkSpan]:
    """Chunk one unit; returned spans tile [0, len(text)) in order."""
    if not text:
        return []
    starts = _block_starts(text)
    bounds = starts + [len(text)]
    blocks = [(bounds[i], bounds[i + 1]) for i in range(len(starts))]

    merged: list[tuple[int, int]] = []
    for b_start, b_end in blocks:
        if not merged:
            merged.append((b_start, b_end))
            continue
        c_start, c_end = merged[-1]
        if _word_count(text[c_start:c_end]) >= TARGET_WORDS:
            merged.append((b_start, b_end))
        else:
            merged[-1] = (c_start, b_end)

    spans: list[ChunkSpan] = []
    for c_start, c_end in merged:
        if _word_count(text[c_start:c_end]) > MAX_WORDS:
            spans.extend(_split_oversized(text, c_start, c_end))
        else:
            spans.append(ChunkSpan(c_start, c_end))
    return spans


def check_tiling(text: str, spans: list[ChunkSpan]) -> list[str]:
    """Tiling violations for one unit; empty when spans partition the text."""
    problems = []
    if not text:
        if spans:
            problems.append("spans present for empty text")
        return problems
    ordered = sorted(spans, key=lambda s: s.start)
    if not ordered:
        problems.append("no spans for non-empty text")
        return problems
    if ordered[0].start != 0:
        problems.append(f"first span starts at {ordered[0].start}, not 0")
    if ordered[-1].end != len(text):
        problems.append(f"last span ends at {ordered[-1].end}, not {len(text)}")
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.end != cur.start:
            problems.append(f"gap or overlap between {prev.end} and {cur.start}")
    return problems
