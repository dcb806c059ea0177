"""A complete review pass over a small mailbox, at the library level.

The same workflow the HTTP service exposes, without the HTTP: open a case,
ask questions in plain language, inspect what the translator and auditor did
to each question, mark hits reviewed, and watch the coverage ledger close.
Every session is journaled to disk, so the final section reopens the store
from the journal files alone and finds the whole investigation intact.

Run it from the repository root:

    python3 demos/investigation_workflow.py
"""

import tempfile
from pathlib import Path

from casework.engine import CaseEngine
from casework.ingest import ingest_message
from casework.service import CaseStore

# -- a mailbox worth investigating ---------------------------------------------

MESSAGES = [
    (
        "m-01@mailbox.local",
        "Kim Ward <kim.ward@enron.com>",
        "Jeff Dasovich <jeff.dasovich@enron.com>",
        "raptor wind-down",
        "Tue, 02 Oct 2001 14:05:00 -0000",
        "The raptor hedge needs to unwind before auditors arrive on Friday.",
    ),
    (
        "m-02@mailbox.local",
        "John Lavorato <john.lavorato@enron.com>",
        "Kim Ward <kim.ward@enron.com>",
        "re: raptor wind-down",
        "Wed, 03 Oct 2001 09:41:00 -0000",
        "Move the raptor positions onto the ledger and keep the memo short.",
    ),
    (
        "m-03@mailbox.local",
        "Kate Symes <kate.symes@enron.com>",
        "Trading Desk <trading-desk@enron.com>",
        "gas schedule",
        "Wed, 03 Oct 2001 16:20:00 -0000",
        "Gas desk will settle and confirm the schedule tomorrow morning.",
    ),
    (
        "m-04@mailbox.local",
        "John Lavorato <john.lavorato@enron.com>",
        "Board List <board@enron.com>",
        "quarterly summary",
        "Fri, 05 Oct 2001 11:00:00 -0000",
        "Earnings summary attached; the ledger entries are final for Q3.",
    ),
]


def raw_message(msg_id, sender, to, subject, date, body):
    return (
        f"Message-ID: <{msg_id}>\n"
        f"From: {sender}\nTo: {to}\nSubject: {subject}\nDate: {date}\n"
        f"\n{body}\n"
    ).encode()


engine = CaseEngine()
for fields in MESSAGES:
    ingest_message(engine, raw_message(*fields), source_uri=fields[0])
print(f"indexed {len(engine)} messages")

# -- open a case and ask in plain language --------------------------------------
#
# The store needs a directory for its journals; reuse it later for the
# restart check. Queries go through the rule-based translator, then the
# auditor, before the engine ever sees them.

journal_dir = Path(tempfile.mkdtemp(prefix="casework-demo-"))
store = CaseStore(journal_dir, engine)
case = store.create_case("raptor wind-down review")
print(f"opened {case['case_id']}: {case['name']}")

session = store.run_query(case["case_id"], query_text="ledger deals with John Lavorato")
print()
print(f"question: {session['query_text']}")
print(f"translated by: {session['translator']}")
print(f"audit corrections: {len(session['corrections'])}")
for corr in session["corrections"]:
    print(f"  {corr['rule_id']} at {corr['json_path']}: {corr['note']}")
print(f"final dsl: {session['dsl']}")
for hit in session["hits"]:
    print(f"  #{hit['rank']} {hit['doc_id']} fused={hit['fused_score']:.4f}")

# A follow-up narrows the same thread; linking it to the parent session
# keeps the investigation's lineage in the journal.
followup = store.run_query(
    case["case_id"],
    query_text='"raptor" after:2001-10-01',
    parent_session_id=session["session_id"],
)
print()
print(f"follow-up: {followup['query_text']}")
print(f"  parent: {followup['parent_session_id']}")
print(f"  hits: {[h['doc_id'] for h in followup['hits']]}")

# -- mark what has been read -----------------------------------------------------
#
# Reviews are per-case, per-document. Re-running the follow-up with
# hide_reviewed shows only what is still waiting for eyes.

store.set_review(case["case_id"], "m-01@mailbox.local", True, note="kickoff message")
store.set_review(
    case["case_id"], "m-02@mailbox.local", True, note="instruction to move positions"
)

visible = store.session(
    case["case_id"], followup["session_id"], hide_reviewed=True
)
print()
print(f"unreviewed hits: {[h['doc_id'] for h in visible['hits']]}")
print(f"hidden because reviewed: {visible['hidden_count']}")

coverage = store.coverage(case["case_id"])
print(
    f"coverage: {coverage['documents_reviewed']} reviewed of "
    f"{coverage['documents_retrieved']} retrieved "
    f"({coverage['review_fraction']:.0%})"
)

# -- the journal survives a restart ----------------------------------------------
#
# A fresh store pointed at the same directory replays cases.jsonl,
# sessions.jsonl and reviews.jsonl; nothing above is lost.

reopened = CaseStore(journal_dir, engine)
replayed = reopened.session(case["case_id"], followup["session_id"])
print()
print(f"after restart, {case['case_id']} still holds "

      f"{len(reopened.sessions[case['case_id']])} sessions")
print(f"replayed follow-up hits: {[h['doc_id'] for h in replayed['hits']]}")
assert replayed == followup
print("replayed session matches the original record exactly")
