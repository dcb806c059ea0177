"""Query grammar: strict parsing, canonical form, paths, schema validation."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from casework.errors import ParseError
from casework.model import default_enron_schema
from casework.querydsl import (
    Bool,
    Knn,
    Match,
    Nested,
    Range,
    Request,
    Term,
    Violation,
    canonical_request_json,
    ensure_valid,
    get_at_path,
    iter_nodes,
    parse_query,
    parse_request,
    query_to_obj,
    request_to_obj,
    set_at_path,
    validate_request,
)

SCHEMA = default_enron_schema()


def parse_err(source) -> ParseError:
    with pytest.raises(ParseError) as exc_info:
        parse_request(source)
    return exc_info.value


class TestParsing:
    def test_match_with_defaults(self):
        request = parse_request('{"query": {"match": {"body": "raptor deal"}}}')
        assert request == Request(Match("body", "raptor deal"), size=10, from_=0)

    def test_accepts_decoded_objects(self):
        obj = {"query": {"term": {"sender": "kate@enron.com"}}, "size": 3, "from": 6}
        request = parse_request(obj)
        assert request.query == Term("sender", "kate@enron.com")
        assert request.size == 3
        assert request.from_ == 6

    def test_knn_default_k(self):
        request = parse_request(
            '{"query": {"nested": {"path": "segments", "query": {"knn": '
            '{"segments.segment_vector": {"query_text": "hidden losses"}}}}}}'
        )
        nested = request.query
        assert isinstance(nested, Nested)
        assert nested.query == Knn("segments.segment_vector", "hidden losses", 100)

    def test_range_bounds(self):
        request = parse_request(
            '{"query": {"range": {"sent_date": {"gte": "2001-01-01", "lte": "2001-12-31"}}}}'
        )
        assert request.query == Range("sent_date", gte="2001-01-01", lte="2001-12-31")
        one_sided = parse_request('{"query": {"range": {"sent_date": {"gte": "2001-01-01"}}}}')
        assert one_sided.query.lte is None

    def test_bool_sections(self):
        request = parse_request(
            json.dumps(
                {
                    "query": {
                        "bool": {
                            "must": [{"match": {"body": "raptor"}}],
                            "must_not": [{"term": {"folder": "spam"}}],
                        }
                    }
                }
            )
        )
        node = request.query
        assert isinstance(node, Bool)
        assert node.must == (Match("body", "raptor"),)
        assert node.must_not == (Term("folder", "spam"),)
        assert node.should == ()
        assert node.filter == ()


class TestParseErrors:
    def test_invalid_json_points_at_root(self):
        assert parse_err("{nope").json_path == "$"

    def test_non_object_root(self):
        assert parse_err("[1,2]").json_path == "$"

    def test_unknown_request_key(self):
        err = parse_err('{"query": {"match": {"body": "x"}}, "limit": 5}')
        assert err.json_path == "$"
        assert "limit" in err.reason

    def test_missing_query(self):
        assert parse_err('{"size": 5}').json_path == "$"

    def test_two_clause_keys(self):
        err = parse_err(
            '{"query": {"match": {"body": "x"}, "term": {"sender": "y"}}}'
        )
        assert err.json_path == "$.query"
        assert "exactly one" in err.reason

    def test_unknown_clause_key(self):
        err = parse_err('{"query": {"fuzzy": {"body": "x"}}}')
        assert err.json_path == "$.query"
        assert "fuzzy" in err.reason

    def test_match_not_an_object(self):
        assert parse_err('{"query": {"match": "body"}}').json_path == "$.query.match"

    def test_match_two_fields(self):
        err = parse_err('{"query": {"match": {"body": "x", "subject": "y"}}}')
        assert err.json_path == "$.query.match"

    def test_match_non_string_text(self):
        err = parse_err('{"query": {"match": {"body": 7}}}')
        assert err.json_path == "$.query.match.body"

    def test_range_empty_bounds(self):
        err = parse_err('{"query": {"range": {"sent_date": {}}}}')
        assert err.json_path == "$.query.range.sent_date"

    def test_range_unknown_bound_key(self):
        err = parse_err('{"query": {"range": {"sent_date": {"between": "x"}}}}')
        assert "between" in err.reason

    def test_range_boolean_bound(self):
        err = parse_err('{"query": {"range": {"sent_date": {"gte": true}}}}')
        assert err.json_path == "$.query.range.sent_date.gte"

    def test_knn_missing_query_text(self):
        err = parse_err(
            '{"query": {"knn": {"segments.segment_vector": {"k": 5}}}}'
        )
        assert err.json_path == "$.query.knn.segments.segment_vector"

    def test_knn_bad_k(self):
        err = parse_err(
            '{"query": {"knn": {"segments.segment_vector": '
            '{"query_text": "x", "k": 0}}}}'
        )
        assert err.json_path == "$.query.knn.segments.segment_vector.k"

    def test_nested_missing_parts(self):
        err = parse_err('{"query": {"nested": {"path": "segments"}}}')
        assert err.json_path == "$.query.nested"

    def test_bool_section_not_a_list(self):
        err = parse_err('{"query": {"bool": {"must": {"match": {"body": "x"}}}}}')
        assert err.json_path == "$.query.bool.must"

    def test_bool_empty(self):
        assert parse_err('{"query": {"bool": {}}}').json_path == "$.query.bool"

    def test_error_path_reaches_into_nested_clause_lists(self):
        err = parse_err(
            json.dumps(
                {
                    "query": {
                        "bool": {
                            "must": [
                                {"match": {"body": "ok"}},
                                {"match": {"subject": 9}},
                            ]
                        }
                    }
                }
            )
        )
        assert err.json_path == "$.query.bool.must[1].match.subject"

    def test_negative_size_and_from(self):
        assert parse_err('{"query": {"match": {"body": "x"}}, "size": -1}').json_path == "$.size"
        assert parse_err('{"query": {"match": {"body": "x"}}, "from": -2}').json_path == "$.from"

    def test_boolean_size_rejected(self):
        assert parse_err('{"query": {"match": {"body": "x"}}, "size": true}').json_path == "$.size"


FIELD_NAMES = st.sampled_from(
    ["body", "subject", "sender", "recipients", "sent_date", "segments.segment_text"]
)
TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=0, max_size=30
)


def leaf_queries():
    match = st.builds(Match, FIELD_NAMES, TEXT)
    term = st.builds(Term, FIELD_NAMES, TEXT)
    bounds = st.one_of(TEXT, st.integers(-1_000_000, 1_000_000))
    gte_only = st.builds(lambda f, g: Range(f, gte=g), FIELD_NAMES, bounds)
    lte_only = st.builds(lambda f, l: Range(f, lte=l), FIELD_NAMES, bounds)
    both = st.builds(lambda f, g, l: Range(f, gte=g, lte=l), FIELD_NAMES, bounds, bounds)
    knn = st.builds(
        Knn,
        st.just("segments.segment_vector"),
        TEXT,
        st.integers(min_value=1, max_value=500),
    )
    return st.one_of(match, term, gte_only, lte_only, both, knn)


@st.composite
def bool_nodes(draw, children):
    sections = {
        name: tuple(draw(st.lists(children, max_size=2)))
        for name in ("must", "should", "must_not", "filter")
    }
    if not any(sections.values()):
        sections["must"] = (draw(children),)
    return Bool(**sections)


def queries():
    def extend(children):
        nested = st.builds(Nested, st.just("segments"), children)
        return st.one_of(bool_nodes(children), nested)

    return st.recursive(leaf_queries(), extend, max_leaves=8)


REQUESTS = st.builds(
    Request, queries(), st.integers(0, 100), st.integers(0, 100)
)


class TestCanonicalForm:
    def test_defaults_materialized(self):
        request = parse_request('{"query": {"match": {"body": "x"}}}')
        obj = request_to_obj(request)
        assert obj["size"] == 10
        assert obj["from"] == 0

    def test_knn_k_materialized(self):
        node = parse_query(
            {"knn": {"segments.segment_vector": {"query_text": "x"}}}
        )
        assert query_to_obj(node)["knn"]["segments.segment_vector"]["k"] == 100

    def test_empty_bool_sections_dropped(self):
        node = Bool(must=(Match("body", "x"),))
        assert set(query_to_obj(node)["bool"]) == {"must"}

    def test_canonical_string_is_key_sorted_and_compact(self):
        request = parse_request('{"size": 5, "query": {"match": {"body": "x"}}}')
        encoded = canonical_request_json(request)
        assert encoded == (
            '{"from":0,"query":{"match":{"body":"x"}},"size":5}'
        )

    @given(REQUESTS)
    def test_round_trip_is_identity_on_requests(self, request):
        assert parse_request(canonical_request_json(request)) == request

    @given(REQUESTS)
    def test_canonical_encoding_is_a_fixed_point(self, request):
        once = canonical_request_json(request)
        again = canonical_request_json(parse_request(once))
        assert once == again


class TestPaths:
    def request_obj(self):
        return {
            "query": {
                "bool": {
                    "must": [
                        {"match": {"body": "raptor"}},
                        {
                            "nested": {
                                "path": "segments",
                                "query": {
                                    "knn": {
                                        "segments.segment_vector": {
                                            "query_text": "losses",
                                            "k": 40,
                                        }
                                    }
                                },
                            }
                        },
                    ]
                }
            },
            "size": 10,
            "from": 0,
        }

    def test_iter_nodes_paths(self):
        request = parse_request(self.request_obj())
        paths = [path for path, _ in iter_nodes(request.query)]
        assert paths == [
            "$.query",
            "$.query.bool.must[0]",
            "$.query.bool.must[1]",
            "$.query.bool.must[1].nested.query",
        ]

    def test_get_at_path(self):
        obj = self.request_obj()
        assert get_at_path(obj, "$.query.bool.must[0].match.body") == "raptor"
        knn = get_at_path(obj, "$.query.bool.must[1].nested.query.knn")
        assert knn["segments.segment_vector"]["k"] == 40

    def test_get_at_missing_path(self):
        with pytest.raises(ParseError):
            get_at_path(self.request_obj(), "$.query.bool.should[0]")

    def test_set_at_path_replaces_subtree(self):
        obj = self.request_obj()
        set_at_path(obj, "$.query.bool.must[0]", {"term": {"sender": "kate"}})
        request = parse_request(obj)
        assert request.query.must[0] == Term("sender", "kate")

    def test_set_at_path_requires_existing_target(self):
        obj = self.request_obj()
        with pytest.raises(ParseError):
            set_at_path(obj, "$.query.bool.must[7]", {})
        with pytest.raises(ParseError):
            set_at_path(obj, "$.query.missing.key", {})

    def test_malformed_path_rejected(self):
        with pytest.raises(ParseError):
            get_at_path({}, "query.bool")
        with pytest.raises(ParseError):
            get_at_path({}, "$..query")


class TestValidation:
    def violations(self, source) -> list[Violation]:
        return validate_request(parse_request(source), SCHEMA)

    def test_valid_requests_have_no_violations(self):
        good = [
            '{"query": {"match": {"body": "raptor"}}}',
            '{"query": {"term": {"sender": "kate@enron.com"}}}',
            '{"query": {"range": {"sent_date": {"gte": "2001-01-01"}}}}',
            '{"query": {"nested": {"path": "segments", "query": '
            '{"match": {"segments.segment_text": "raptor"}}}}}',
            '{"query": {"nested": {"path": "segments", "query": {"knn": '
            '{"segments.segment_vector": {"query_text": "x"}}}}}}',
        ]
        for source in good:
            assert self.violations(source) == []

    def test_unknown_field(self):
        violations = self.violations('{"query": {"match": {"executive": "lay"}}}')
        assert [v.code for v in violations] == ["unknown_field"]
        assert violations[0].json_path == "$.query.match"
        assert violations[0].field == "executive"

    def test_unknown_subfield_of_nested(self):
        violations = self.violations(
            '{"query": {"nested": {"path": "segments", "query": '
            '{"match": {"segments.wrong": "x"}}}}}'
        )
        assert violations[0].code == "unknown_field"

    def test_match_on_keyword_is_type_mismatch(self):
        violations = self.violations('{"query": {"match": {"sender": "kate"}}}')
        assert [v.code for v in violations] == ["type_mismatch"]

    def test_term_on_text_is_type_mismatch(self):
        violations = self.violations('{"query": {"term": {"body": "raptor"}}}')
        assert [v.code for v in violations] == ["type_mismatch"]

    def test_range_on_text_is_type_mismatch(self):
        violations = self.violations(
            '{"query": {"range": {"subject": {"gte": "a"}}}}'
        )
        assert [v.code for v in violations] == ["type_mismatch"]

    def test_date_range_with_integer_bound(self):
        violations = self.violations(
            '{"query": {"range": {"sent_date": {"gte": 20010101}}}}'
        )
        assert [v.code for v in violations] == ["type_mismatch"]
        assert violations[0].json_path == "$.query.range.sent_date.gte"

    def test_knn_on_plain_field_is_type_mismatch(self):
        violations = self.violations(
            '{"query": {"nested": {"path": "segments", "query": '
            '{"knn": {"body": {"query_text": "x"}}}}}}'
        )
        assert [v.code for v in violations] == ["type_mismatch"]

    def test_segment_field_outside_nested_is_misuse(self):
        violations = self.violations(
            '{"query": {"match": {"segments.segment_text": "raptor"}}}'
        )
        assert [v.code for v in violations] == ["nested_misuse"]

    def test_knn_outside_nested_is_misuse(self):
        violations = self.violations(
            '{"query": {"knn": {"segments.segment_vector": {"query_text": "x"}}}}'
        )
        assert [v.code for v in violations] == ["nested_misuse"]

    def test_top_level_field_inside_nested_is_misuse(self):
        violations = self.violations(
            '{"query": {"nested": {"path": "segments", "query": '
            '{"match": {"body": "x"}}}}}'
        )
        assert [v.code for v in violations] == ["nested_misuse"]

    def test_nested_clauses_do_not_nest(self):
        violations = self.violations(
            '{"query": {"nested": {"path": "segments", "query": {"nested": '
            '{"path": "segments", "query": {"match": '
            '{"segments.segment_text": "x"}}}}}}}'
        )
        assert any(v.code == "nested_misuse" for v in violations)

    def test_nested_path_must_be_segment_field(self):
        violations = self.violations(
            '{"query": {"nested": {"path": "body", "query": '
            '{"match": {"segments.segment_text": "x"}}}}}'
        )
        assert violations[0].code == "type_mismatch"

    def test_violations_reported_in_document_order(self):
        violations = self.violations(
            json.dumps(
                {
                    "query": {
                        "bool": {
                            "must": [
                                {"match": {"bogus_a": "x"}},
                                {"match": {"bogus_b": "y"}},
                            ]
                        }
                    }
                }
            )
        )
        assert [v.field for v in violations] == ["bogus_a", "bogus_b"]
        assert violations[0].json_path == "$.query.bool.must[0].match"

    def test_ensure_valid_raises_on_first(self):
        request = parse_request('{"query": {"match": {"executive": "lay"}}}')
        with pytest.raises(ParseError) as exc_info:
            ensure_valid(request, SCHEMA)
        assert exc_info.value.json_path == "$.query.match"
        assert "unknown_field" in exc_info.value.reason

    def test_ensure_valid_passes_clean_request(self):
        request = parse_request('{"query": {"match": {"body": "x"}}}')
        ensure_valid(request, SCHEMA)
