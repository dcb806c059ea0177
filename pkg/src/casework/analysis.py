"""Tokenization and the search-time synonym graph.

No stemming and no stopword removal: forensic recall must not lose exact
identifiers (case numbers, codenames). Synonym groups carry variant mapping
instead, and expansion happens at query time only, so the physical index is
invariant under synonym-graph changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SynonymLoadError

# Unicode alphanumeric runs; underscore is a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TokenStream:
    """Ordered (term, position) pairs with strictly increasing positions."""

    tokens: tuple[tuple[str, int], ...]

    def terms(self) -> list[str]:
        return [t for t, _ in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def tokenize(text: str) -> TokenStream:
    """Lowercase and split on any non-alphanumeric codepoint.

    Empty fragments are dropped; positions are assigned sequentially from 0
    over the kept tokens.
    """
    terms = _TOKEN_RE.findall(text.lower())
    return TokenStream(tuple((term, pos) for pos, term in enumerate(terms)))


@dataclass(frozen=True)
class SynonymGraph:
    """Symmetric term-equivalence groups, applied to lexical clauses only."""

    groups: tuple[frozenset[str], ...] = ()
    _member_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, frozenset[str]] = {}
        for group in self.groups:
            for term in group:
                index[term] = group
        object.__setattr__(self, "_member_index", index)

    def group_of(self, term: str) -> frozenset[str] | None:
        return self._member_index.get(term)


EMPTY_GRAPH = SynonymGraph()


def load_synonym_groups(source: str) -> SynonymGraph:
    """Parse line-oriented comma-separated synonym groups.

    Each line becomes one group after lowercasing and tokenizing every entry
    down to a single term. ``#`` starts a comment. Raises SynonymLoadError on
    multi-word entries, groups smaller than two terms, or a term appearing in
    two groups.
    """
    groups: list[frozenset[str]] = []
    seen: dict[str, int] = {}
    for lineno, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        members: set[str] = set()
        for entry in line.split(","):
            entry = entry.strip()
            if not entry:
                continue
            stream = tokenize(entry)
            if len(stream) != 1:
                raise SynonymLoadError(
                    f"line {lineno}: entry {entry!r} is not a single term"
                )
            members.add(stream.terms()[0])
        if len(members) < 2:
            raise SynonymLoadError(f"line {lineno}: group needs at least 2 distinct terms")
        for term in members:
            if term in seen:
                raise SynonymLoadError(
                    f"line {lineno}: term {term!r} already in group from line {seen[term]}"
                )
            seen[term] = lineno
        groups.append(frozenset(members))
    return SynonymGraph(tuple(groups))


def load_synonym_file(path) -> SynonymGraph:
    with open(path, encoding="utf-8") as fh:
        return load_synonym_groups(fh.read())


def expand_term(term: str, graph: SynonymGraph) -> frozenset[str]:
    """Query-time-only expansion: the group containing ``term``, else {term}."""
    group = graph.group_of(term)
    if group is not None:
        return group
    return frozenset((term,))
