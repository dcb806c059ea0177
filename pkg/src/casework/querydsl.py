"""Structured query language: AST, strict parser, canonical form, validation.

The wire format is a small JSON dialect. Every request is an object with a
required ``query`` and optional ``size``/``from``. A query object carries
exactly one clause key: ``match``, ``term``, ``range``, ``nested``, ``knn``,
or ``bool``. Parsing is strict: unknown keys, wrong JSON types, and empty
clause bodies are rejected with the JSON path of the offending node so a
caller (human or machine) can point at the problem.

Canonical serialization sorts keys, strips whitespace, materializes defaults
(``size``, ``from``, ``knn.k``) and omits empty bool lists. Two requests are
the same request iff their canonical strings are equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import ParseError
from .model import (
    SEGMENT_TEXT_SUBFIELD,
    SEGMENT_VECTOR_SUBFIELD,
    FieldType,
    IndexSchema,
)

DEFAULT_SIZE = 10
DEFAULT_KNN_K = 100

CLAUSE_KEYS = ("bool", "knn", "match", "nested", "range", "term")
BOOL_SECTIONS = ("must", "should", "must_not", "filter")


@dataclass(frozen=True)
class Match:
    field: str
    text: str


@dataclass(frozen=True)
class Term:
    field: str
    value: str


@dataclass(frozen=True)
class Range:
    field: str
    gte: Optional[Union[str, int]] = None
    lte: Optional[Union[str, int]] = None


@dataclass(frozen=True)
class Knn:
    field: str
    query_text: str
    k: int = DEFAULT_KNN_K


@dataclass(frozen=True)
class Nested:
    path: str
    query: "Query"


@dataclass(frozen=True)
class Bool:
    must: tuple["Query", ...] = ()
    should: tuple["Query", ...] = ()
    must_not: tuple["Query", ...] = ()
    filter: tuple["Query", ...] = ()


Query = Union[Match, Term, Range, Knn, Nested, Bool]


@dataclass(frozen=True)
class Request:
    query: Query
    size: int = DEFAULT_SIZE
    from_: int = 0


# -- parsing --------------------------------------------------------------------


def _expect_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ParseError(path, f"expected a string, got {type(value).__name__}")
    return value


def _expect_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _parse_match(body, path: str) -> Match:
    obj = _expect_object(body, path)
    if len(obj) != 1:
        raise ParseError(path, f"match takes exactly one field, got {len(obj)}")
    field_name, text = next(iter(obj.items()))
    return Match(field_name, _expect_string(text, f"{path}.{field_name}"))


def _parse_term(body, path: str) -> Term:
    obj = _expect_object(body, path)
    if len(obj) != 1:
        raise ParseError(path, f"term takes exactly one field, got {len(obj)}")
    field_name, value = next(iter(obj.items()))
    return Term(field_name, _expect_string(value, f"{path}.{field_name}"))


def _parse_range(body, path: str) -> Range:
    obj = _expect_object(body, path)
    if len(obj) != 1:
        raise ParseError(path, f"range takes exactly one field, got {len(obj)}")
    field_name, bounds = next(iter(obj.items()))
    bounds_path = f"{path}.{field_name}"
    bounds = _expect_object(bounds, bounds_path)
    extra = sorted(set(bounds) - {"gte", "lte"})
    if extra:
        raise ParseError(bounds_path, f"unknown range keys: {', '.join(extra)}")
    if not bounds:
        raise ParseError(bounds_path, "range requires at least one of gte, lte")
    gte = bounds.get("gte")
    lte = bounds.get("lte")
    for name, bound in (("gte", gte), ("lte", lte)):
        if bound is None:
            continue
        if isinstance(bound, bool) or not isinstance(bound, (str, int)):
            raise ParseError(
                f"{bounds_path}.{name}",
                f"expected a string or integer, got {type(bound).__name__}",
            )
    return Range(field_name, gte=gte, lte=lte)


def _parse_knn(body, path: str) -> Knn:
    obj = _expect_object(body, path)
    if len(obj) != 1:
        raise ParseError(path, f"knn takes exactly one field, got {len(obj)}")
    field_name, spec = next(iter(obj.items()))
    spec_path = f"{path}.{field_name}"
    spec = _expect_object(spec, spec_path)
    extra = sorted(set(spec) - {"query_text", "k"})
    if extra:
        raise ParseError(spec_path, f"unknown knn keys: {', '.join(extra)}")
    if "query_text" not in spec:
        raise ParseError(spec_path, "knn requires query_text")
    query_text = _expect_string(spec["query_text"], f"{spec_path}.query_text")
    k = DEFAULT_KNN_K
    if "k" in spec:
        k = _expect_int(spec["k"], f"{spec_path}.k")
        if k < 1:
            raise ParseError(f"{spec_path}.k", "k must be >= 1")
    return Knn(field_name, query_text, k)


def _parse_nested(body, path: str) -> Nested:
    obj = _expect_object(body, path)
    extra = sorted(set(obj) - {"path", "query"})
    if extra:
        raise ParseError(path, f"unknown nested keys: {', '.join(extra)}")
    if "path" not in obj or "query" not in obj:
        raise ParseError(path, "nested requires path and query")
    nested_path = _expect_string(obj["path"], f"{path}.path")
    inner = parse_query(obj["query"], f"{path}.query")
    return Nested(nested_path, inner)


def _parse_bool(body, path: str) -> Bool:
    obj = _expect_object(body, path)
    extra = sorted(set(obj) - set(BOOL_SECTIONS))
    if extra:
        raise ParseError(path, f"unknown bool keys: {', '.join(extra)}")
    sections: dict[str, tuple] = {}
    for section in BOOL_SECTIONS:
        raw = obj.get(section, [])
        if not isinstance(raw, list):
            raise ParseError(
                f"{path}.{section}",
                f"expected a list, got {type(raw).__name__}",
            )
        sections[section] = tuple(
            parse_query(item, f"{path}.{section}[{i}]") for i, item in enumerate(raw)
        )
    node = Bool(**sections)
    if not (node.must or node.should or node.must_not or node.filter):
        raise ParseError(path, "bool requires at least one non-empty section")
    return node


_CLAUSE_PARSERS = {
    "match": _parse_match,
    "term": _parse_term,
    "range": _parse_range,
    "knn": _parse_knn,
    "nested": _parse_nested,
    "bool": _parse_bool,
}


def parse_query(obj, path: str = "$.query") -> Query:
    """Parse one query object; exactly one clause key must be present."""
    obj = _expect_object(obj, path)
    keys = sorted(obj)
    unknown = [key for key in keys if key not in _CLAUSE_PARSERS]
    if unknown:
        raise ParseError(path, f"unknown clause keys: {', '.join(unknown)}")
    if len(keys) != 1:
        raise ParseError(
            path, f"expected exactly one clause key, got {len(keys)}: {', '.join(keys)}"
        )
    key = keys[0]
    return _CLAUSE_PARSERS[key](obj[key], f"{path}.{key}")


def parse_request(source) -> Request:
    """Parse a request from a JSON string or an already-decoded object."""
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError("$", f"invalid JSON: {exc}") from None
    obj = _expect_object(source, "$")
    extra = sorted(set(obj) - {"query", "size", "from"})
    if extra:
        raise ParseError("$", f"unknown request keys: {', '.join(extra)}")
    if "query" not in obj:
        raise ParseError("$", "request requires a query")
    query = parse_query(obj["query"], "$.query")
    size = DEFAULT_SIZE
    if "size" in obj:
        size = _expect_int(obj["size"], "$.size")
        if size < 0:
            raise ParseError("$.size", "size must be >= 0")
    from_ = 0
    if "from" in obj:
        from_ = _expect_int(obj["from"], "$.from")
        if from_ < 0:
            raise ParseError("$.from", "from must be >= 0")
    return Request(query=query, size=size, from_=from_)


# -- serialization ----------------------------------------------------------------


def query_to_obj(node: Query) -> dict:
    """Plain-dict form with defaults materialized and empty sections dropped."""
    if isinstance(node, Match):
        return {"match": {node.field: node.text}}
    if isinstance(node, Term):
        return {"term": {node.field: node.value}}
    if isinstance(node, Range):
        bounds = {}
        if node.gte is not None:
            bounds["gte"] = node.gte
        if node.lte is not None:
            bounds["lte"] = node.lte
        return {"range": {node.field: bounds}}
    if isinstance(node, Knn):
        return {"knn": {node.field: {"query_text": node.query_text, "k": node.k}}}
    if isinstance(node, Nested):
        return {"nested": {"path": node.path, "query": query_to_obj(node.query)}}
    if isinstance(node, Bool):
        body = {}
        for section in BOOL_SECTIONS:
            clauses = getattr(node, section)
            if clauses:
                body[section] = [query_to_obj(c) for c in clauses]
        return {"bool": body}
    raise TypeError(f"not a query node: {type(node).__name__}")


def request_to_obj(request: Request) -> dict:
    return {
        "query": query_to_obj(request.query),
        "size": request.size,
        "from": request.from_,
    }


def canonical_request_json(request: Request) -> str:
    """Key-sorted, whitespace-free encoding; equal strings mean equal requests."""
    return json.dumps(request_to_obj(request), sort_keys=True, separators=(",", ":"))


def canonical_query_json(node: Query) -> str:
    return json.dumps(query_to_obj(node), sort_keys=True, separators=(",", ":"))


# -- traversal and path editing ------------------------------------------------------


def iter_nodes(node: Query, path: str = "$.query") -> Iterator[tuple[str, Query]]:
    """Yield (json_path, node) pairs in document order, parents first.

    Paths address the query object itself (the dict holding the clause key),
    matching the paths reported by the parser and validator.
    """
    yield path, node
    if isinstance(node, Nested):
        yield from iter_nodes(node.query, f"{path}.nested.query")
    elif isinstance(node, Bool):
        for section in BOOL_SECTIONS:
            for i, child in enumerate(getattr(node, section)):
                yield from iter_nodes(child, f"{path}.bool.{section}[{i}]")


def _path_tokens(path: str) -> list[Union[str, int]]:
    if not path.startswith("$"):
        raise ParseError(path, "path must start with $")
    tokens: list[Union[str, int]] = []
    i = 1
    while i < len(path):
        ch = path[i]
        if ch == ".":
            j = i + 1
            while j < len(path) and path[j] not in ".[":
                j += 1
            if j == i + 1:
                raise ParseError(path, f"empty path segment at offset {i}")
            tokens.append(path[i + 1 : j])
            i = j
        elif ch == "[":
            j = path.index("]", i)
            tokens.append(int(path[i + 1 : j]))
            i = j + 1
        else:
            raise ParseError(path, f"unexpected character {ch!r} at offset {i}")
    return tokens


def get_at_path(obj, path: str):
    """Fetch the value a JSON path addresses inside a plain dict/list tree."""
    node = obj
    for token in _path_tokens(path):
        try:
            node = node[token]
        except (KeyError, IndexError, TypeError):
            raise ParseError(path, f"path not present at segment {token!r}") from None
    return node


def set_at_path(obj, path: str, value) -> None:
    """Replace the subtree a JSON path addresses; the path must already exist."""
    tokens = _path_tokens(path)
    if not tokens:
        raise ParseError(path, "cannot replace the document root")
    parent = get_at_path(obj, "$" + _render_tokens(tokens[:-1]))
    last = tokens[-1]
    try:
        parent[last]
    except (KeyError, IndexError, TypeError):
        raise ParseError(path, f"path not present at segment {last!r}") from None
    parent[last] = value


def _render_tokens(tokens: list[Union[str, int]]) -> str:
    out = []
    for token in tokens:
        if isinstance(token, int):
            out.append(f"[{token}]")
        else:
            out.append(f".{token}")
    return "".join(out)


# -- schema validation -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One schema conflict found in a parsed query."""

    json_path: str
    code: str
    message: str
    field: str = ""


def _base_field(name: str) -> str:
    return name.split(".", 1)[0]


def _validate_node(
    node: Query,
    path: str,
    schema: IndexSchema,
    nested_path: Optional[str],
    out: list[Violation],
) -> None:
    def base_type(name: str) -> Optional[FieldType]:
        return schema.fields.get(_base_field(name))

    def field_type(name: str) -> Optional[FieldType]:
        base = base_type(name)
        if base is None:
            return None
        if base is FieldType.NESTED_SEGMENT and "." in name:
            sub = name.split(".", 1)[1]
            if sub == SEGMENT_TEXT_SUBFIELD:
                return FieldType.TEXT
            if sub == SEGMENT_VECTOR_SUBFIELD:
                return FieldType.NESTED_SEGMENT
            return None
        if base is not FieldType.NESTED_SEGMENT and "." in name:
            return None
        return base

    def check_nesting(name: str, node_path: str) -> None:
        base = base_type(name)
        if base is None:
            return
        if base is FieldType.NESTED_SEGMENT:
            if nested_path is None:
                out.append(
                    Violation(
                        node_path,
                        "nested_misuse",
                        f"field {name} must appear inside a nested clause",
                        name,
                    )
                )
            elif _base_field(name) != nested_path:
                out.append(
                    Violation(
                        node_path,
                        "nested_misuse",
                        f"field {name} does not belong to nested path {nested_path}",
                        name,
                    )
                )
        elif nested_path is not None:
            out.append(
                Violation(
                    node_path,
                    "nested_misuse",
                    f"field {name} is not under nested path {nested_path}",
                    name,
                )
            )

    def check_known(name: str, node_path: str) -> bool:
        if field_type(name) is None:
            out.append(
                Violation(node_path, "unknown_field", f"unknown field {name}", name)
            )
            return False
        return True

    if isinstance(node, Match):
        node_path = f"{path}.match"
        if check_known(node.field, node_path):
            check_nesting(node.field, node_path)
            ftype = field_type(node.field)
            if ftype is not FieldType.TEXT:
                out.append(
                    Violation(
                        node_path,
                        "type_mismatch",
                        f"match requires a text field, {node.field} is {ftype.value}",
                        node.field,
                    )
                )
    elif isinstance(node, Term):
        node_path = f"{path}.term"
        if check_known(node.field, node_path):
            check_nesting(node.field, node_path)
            ftype = field_type(node.field)
            if ftype is not FieldType.KEYWORD:
                out.append(
                    Violation(
                        node_path,
                        "type_mismatch",
                        f"term requires a keyword field, {node.field} is {ftype.value}",
                        node.field,
                    )
                )
    elif isinstance(node, Range):
        node_path = f"{path}.range"
        if check_known(node.field, node_path):
            check_nesting(node.field, node_path)
            ftype = field_type(node.field)
            if ftype not in (FieldType.DATE, FieldType.INTEGER):
                out.append(
                    Violation(
                        node_path,
                        "type_mismatch",
                        f"range requires a date or integer field, {node.field} is {ftype.value}",
                        node.field,
                    )
                )
            else:
                want = str if ftype is FieldType.DATE else int
                for name, bound in (("gte", node.gte), ("lte", node.lte)):
                    if bound is not None and not isinstance(bound, want):
                        out.append(
                            Violation(
                                f"{node_path}.{node.field}.{name}",
                                "type_mismatch",
                                f"{ftype.value} bound must be a {want.__name__}",
                                node.field,
                            )
                        )
    elif isinstance(node, Knn):
        node_path = f"{path}.knn"
        if check_known(node.field, node_path):
            base = base_type(node.field)
            is_vector = (
                base is FieldType.NESTED_SEGMENT
                and node.field
                == f"{_base_field(node.field)}.{SEGMENT_VECTOR_SUBFIELD}"
            )
            if not is_vector:
                out.append(
                    Violation(
                        node_path,
                        "type_mismatch",
                        f"knn requires a segment vector field, got {node.field}",
                        node.field,
                    )
                )
            else:
                check_nesting(node.field, node_path)
    elif isinstance(node, Nested):
        node_path = f"{path}.nested"
        base = schema.fields.get(node.path)
        if base is None:
            out.append(
                Violation(
                    node_path, "unknown_field", f"unknown nested path {node.path}", node.path
                )
            )
        elif base is not FieldType.NESTED_SEGMENT:
            out.append(
                Violation(
                    node_path,
                    "type_mismatch",
                    f"nested path must be a nested_segment field, {node.path} is "
                    f"{base.value}",
                    node.path,
                )
            )
        if nested_path is not None:
            out.append(
                Violation(node_path, "nested_misuse", "nested clauses do not nest", node.path)
            )
        _validate_node(node.query, f"{node_path}.query", schema, node.path, out)
    elif isinstance(node, Bool):
        for section in BOOL_SECTIONS:
            for i, child in enumerate(getattr(node, section)):
                _validate_node(
                    child, f"{path}.bool.{section}[{i}]", schema, nested_path, out
                )


def validate_request(request: Request, schema: IndexSchema) -> list[Violation]:
    """All schema conflicts in the request, in document order."""
    out: list[Violation] = []
    _validate_node(request.query, "$.query", schema, None, out)
    return out


def ensure_valid(request: Request, schema: IndexSchema) -> None:
    """Raise ParseError on the first schema conflict."""
    violations = validate_request(request, schema)
    if violations:
        first = violations[0]
        raise ParseError(first.json_path, f"{first.code}: {first.message}")
