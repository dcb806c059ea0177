"""A tour of the query language, its validator, and the audit gate.

The search engine only executes requests that parse into the typed query
tree and pass schema validation. This walks the whole surface: parsing and
canonical serialization, validation failures with their JSON paths, and the
five-rule auditor that repairs or rejects machine-written drafts before
they reach the index.

Run it from the repository root:

    python3 demos/query_dsl_tour.py
"""

import json

from casework.engine import CaseEngine
from casework.errors import AuditReject, ParseError
from casework.querydsl import (
    canonical_request_json,
    parse_request,
    request_to_obj,
    set_at_path,
    validate_request,
)
from casework.translate import Auditor

engine = CaseEngine()
schema = engine.schema
auditor = Auditor(schema)

# -- parsing and canonical form -------------------------------------------------
#
# A request is JSON (or an equivalent dict) with one query and optional
# paging. Parsing fills the paging defaults; the canonical encoding is
# key-sorted and whitespace-free, so equal strings mean equal requests.

request = parse_request(
    """
    {"query": {"bool": {
        "must": [{"match": {"body": "raptor hedge"}}],
        "filter": [{"term": {"folder": "inbox"}}],
        "must_not": [{"term": {"sender": "spam@enron.com"}}]
    }}}
    """
)
print("canonical:", canonical_request_json(request))

# The same text round-trips: parse(canonical) == original tree.
assert parse_request(canonical_request_json(request)) == request
print("round-trip: parse(canonical) reproduces the tree")

# Structural errors are ParseError with the JSON path of the bad node.
for bad in [
    '{"size": 10}',
    '{"query": {"match": {"body": "x", "subject": "y"}}}',
    '{"query": {"range": {"sent_date": {}}}}',
]:
    try:
        parse_request(bad)
    except ParseError as exc:
        print(f"parse error at {exc.json_path}: {exc.reason}")

# -- validation against the mailbox schema ---------------------------------------
#
# Parsing checks shape; validation checks the tree against the field table.
# Violations carry a machine-readable code and the path of the offender.

valid = parse_request({"query": {"term": {"folder": "inbox"}}})
print()
print("violations on a clean request:", validate_request(valid, schema))

suspect = parse_request(
    {
        "query": {
            "bool": {
                "must": [
                    {"term": {"body": "raptor"}},
                    {"match": {"segments.segment_text": "shred"}},
                    {"range": {"folder": {"gte": "a"}}},
                ]
            }
        }
    }
)
for v in validate_request(suspect, schema):
    print(f"{v.code} at {v.json_path}: {v.message}")

# -- the audit gate ---------------------------------------------------------------
#
# Machine-written drafts come from translators and are never trusted. The
# auditor applies a fixed repertoire: R1/R2 reject what cannot be saved,
# R3/R4/R5 rewrite what can, and every rewrite is recorded with its path
# and replacement so the repair is replayable.

# R5: a segment field used outside a nested clause gets wrapped in one.
hoisted = parse_request({"query": {"match": {"segments.segment_text": "shred"}}})
report = auditor.audit(hoisted)
print()
for corr in report.corrections:
    print(f"{corr.rule_id} at {corr.json_path}: {corr.note}")
print("after R5:", canonical_request_json(report.request))

# R3: a person's name does not belong inside a vector clause; the auditor
# moves it to an exact people filter and keeps the residual text semantic.
name_in_knn = parse_request(
    {
        "query": {
            "nested": {
                "path": "segments",
                "query": {
                    "knn": {
                        "segments.segment_vector": {
                            "query_text": "deals with John Lavorato",
                            "k": 100,
                        }
                    }
                },
            }
        }
    }
)
report = auditor.audit(name_in_knn, query_text="deals with John Lavorato")
print()
for corr in report.corrections:
    print(f"{corr.rule_id} at {corr.json_path}: {corr.note}")
print("after R3:", canonical_request_json(report.request))
assert not validate_request(report.request, schema)

# R1/R2: unknown fields and type conflicts are not repairable.
print()
for label, draft in [
    ("unknown field", {"query": {"term": {"priority": "high"}}}),
    ("exact match on analyzed text", {"query": {"term": {"body": "raptor"}}}),
]:
    try:
        auditor.audit(parse_request(draft))
    except AuditReject as exc:
        print(f"{label}: rejected by {exc.rule_id}: {exc.message}")

# Audited output is a fixed point: auditing it again changes nothing.
again = auditor.audit(report.request)
assert again.corrections == ()
print()
print("auditing an audited request yields zero corrections")

# -- corrections are replayable ----------------------------------------------------
#
# Applying the recorded replacements to the original draft, in order,
# reproduces the audited request exactly.

report = auditor.audit(hoisted)
replayed = request_to_obj(hoisted)
for corr in report.corrections:
    set_at_path(replayed, corr.json_path, json.loads(json.dumps(corr.replacement)))
assert parse_request(replayed) == report.request
print("replaying recorded corrections reproduces the audited request")
