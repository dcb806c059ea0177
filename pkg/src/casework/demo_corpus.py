"""Deterministic 200-message demonstration corpus with gold labels.

The corpus exercises the complementary failure modes of the two retrieval
channels. Each of the five investigation scenarios gets eight relevant
messages in three flavors:

* exact: long single-segment bodies (~350 words) where each query token
  appears exactly once. Keyword scoring finds them easily; their segment
  vectors are diluted by the filler, so meaning-level search ranks more than
  a hundred other segments above them.
* paraphrase: short bodies that restate the intent with morphological
  cousins of the query words (heavy character-trigram overlap) while
  containing none of the query tokens or their synonyms. Semantic search
  finds them; keyword scoring cannot.
* synonym: bodies reachable only through the synonym graph (they contain a
  group-mate of a query token, never the token itself).

Around them sit per-scenario distractors (one query token each, not
relevant), a large block of decoy digests with mild trigram affinity to all
five queries (they pack the top of the vector rankings above the exact
messages), and neutral background chatter. The class proportions are the
tuning knobs for the hybrid-beats-both evaluation.

Everything is generated from fixed seeds; building the corpus twice yields
byte-identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

EXACT_PER_SCENARIO = 3
PARAPHRASE_PER_SCENARIO = 3
SYNONYM_PER_SCENARIO = 2
DISTRACTORS_PER_SCENARIO = 4
DECOY_COUNT = 120
BACKGROUND_COUNT = 20

EXACT_BODY_WORDS = 350
SEED = 20011205


@dataclass(frozen=True)
class Scenario:
    """One investigation theme: its query, tokens, synonyms, paraphrase text."""

    name: str
    query_text: str
    tokens: tuple[str, ...]
    synonym: str
    synonym_of: str
    paraphrases: tuple[str, ...]
    distractor_contexts: tuple[str, ...]


SCENARIOS = (
    Scenario(
        name="document-destruction",
        query_text="instructions to destroy documents",
        tokens=("instructions", "destroy", "documents"),
        synonym="shred",
        synonym_of="destroy",
        paraphrases=(
            "urgent memo instructing clerks on destructing documentation and instructional disposal",
            "note instructing teams about destructing documental records before the review",
            "circular on instructive destruction of documentation bundles this week",
        ),
        distractor_contexts=(
            "facilities will destroy the broken pallets behind the warehouse",
            "the orientation packet documents parking rules for visitors",
            "new hire instructions cover badge pickup and cafeteria hours",
            "please destroy outdated marketing posters in the supply room",
        ),
    ),
    Scenario(
        name="financial-anxiety",
        query_text="anxiety about financial stability",
        tokens=("anxiety", "financial", "stability"),
        synonym="worry",
        synonym_of="anxiety",
        paraphrases=(
            "anxious chatter over the financier and monetary stabilization slipping",
            "staff growing anxious as financing wobbles and stabilizing efforts stall",
            "memo on anxiousness around financier solvency and price stabilization",
        ),
        distractor_contexts=(
            "the wellness session on test anxiety is moved to thursday",
            "quarterly financial templates are now in the shared drive",
            "the tripod lacks stability on the carpeted floor",
            "her anxiety before presentations faded after practice",
        ),
    ),
    Scenario(
        name="executive-detention",
        query_text="executives held in detention",
        tokens=("executives", "held", "detention"),
        synonym="imprisonment",
        synonym_of="detention",
        paraphrases=(
            "briefing on executive detainment and the holding of senior officers abroad",
            "wire about an executive detained overseas while holdings were frozen",
            "update on detaining executive staff and their custodial holding",
        ),
        distractor_contexts=(
            "the executives dinner moved to the club at seven",
            "the elevator held six people during the inspection",
            "after school detention rules were mailed to parents",
            "several executives joined the charity golf outing",
        ),
    ),
    Scenario(
        name="foreign-payments",
        query_text="payment to foreign accounts",
        tokens=("payment", "foreign", "accounts"),
        synonym="remittance",
        synonym_of="payment",
        paraphrases=(
            "payments routed through foreigner accounting desks without approvals",
            "payable transfers to a foreigner accountancy raised eyebrows",
            "offshore payments and accountings for a foreigner entity flagged",
        ),
        distractor_contexts=(
            "your expense payment was approved and will post friday",
            "the foreign film series continues in the auditorium",
            "new vendor accounts require two signatures to open",
            "payment kiosks in the lobby accept cards only",
        ),
    ),
    Scenario(
        name="investor-threats",
        query_text="threats from angry investors",
        tokens=("threats", "angry", "investors"),
        synonym="intimidation",
        synonym_of="threats",
        paraphrases=(
            "threatening calls from angered investing partners after the briefing",
            "investor group sent threatening notes and angered voicemails",
            "angered investor faction kept threatening the board with lawsuits",
        ),
        distractor_contexts=(
            "security threats drill scheduled for the parking garage",
            "the angry printer on four finally got replaced",
            "investors relations posted the webcast replay link",
            "wasp threats near the patio door were handled",
        ),
    ),
)

# every token retrieval must reach only through engineered paths
BANNED_TOKENS = frozenset(
    t for s in SCENARIOS for t in s.tokens
) | frozenset(s.synonym for s in SCENARIOS)

FILLER_WORDS = (
    "meeting schedule review draft agenda update status summary office "
    "coffee printer badge lobby elevator travel booking calendar invite "
    "deadline revision folder binder notes lunch vendor catering budget "
    "forecast headcount training seminar workshop conference room phone "
    "voicemail fax copier supplies order shipment delivery courier desk "
    "chair monitor keyboard laptop network password login ticket helpdesk "
    "survey feedback newsletter holiday parking garage shuttle policy"
).split()

DECOY_PHRASES = (
    "instructive destructive documentation drives",
    "anxious financier stabilization chatter",
    "executive custodial holding updates",
    "payable foreigner accounting roundups",
    "threatening angered investing rumblings",
)

DECOY_INTROS = (
    "weekly digest covering",
    "notes from the floor on",
    "clipping service roundup of",
    "morning brief touching",
    "summary sheet gathering",
    "desk report compiling",
)

BACKGROUND_SENTENCES = (
    "the cafeteria menu rotates again next week",
    "please return the projector cart to the storage room",
    "badge readers will be offline sunday morning",
    "the shuttle to the airport now leaves on the hour",
    "new recycling bins arrived for every floor",
    "the gym downstairs extended its evening hours",
    "flu shots are available in the first aid room",
    "the garage elevator is back in service",
    "holiday schedules are posted outside the mail room",
    "the lobby art installation comes down friday",
)

PERSONAS = (
    ("Kate Adams", "kate.adams"),
    ("Ray Bloom", "ray.bloom"),
    ("Dana Cole", "dana.cole"),
    ("Omar Diaz", "omar.diaz"),
    ("June Ellis", "june.ellis"),
    ("Paul Finch", "paul.finch"),
    ("Mia Grant", "mia.grant"),
    ("Ivan Hale", "ivan.hale"),
    ("Lena Irwin", "lena.irwin"),
    ("Theo James", "theo.james"),
    ("Nora Klein", "nora.klein"),
    ("Sam Lowe", "sam.lowe"),
)

DOMAIN = "meridian-corp.com"


def _persona(i: int) -> tuple[str, str]:
    name, user = PERSONAS[i % len(PERSONAS)]
    return name, f"{user}@{DOMAIN}"


def _date_header(i: int) -> str:
    # deterministic spread across 2001; weekday names are cosmetic
    day = (i * 3) % 28 + 1
    month = (i * 7) % 12 + 1
    hour = (8 + i) % 12 + 6
    minute = (i * 11) % 60
    return f"Mon, {day:02d} {'Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec'.split()[month - 1]} 2001 {hour:02d}:{minute:02d}:00 -0000"


def _filler(rng: random.Random, count: int) -> list[str]:
    return [FILLER_WORDS[rng.randrange(len(FILLER_WORDS))] for _ in range(count)]


def _exact_body(scenario: Scenario, doc_index: int) -> str:
    """~350 words, one paragraph, each query token exactly once."""
    rng = random.Random(SEED + doc_index)
    words = _filler(rng, EXACT_BODY_WORDS - len(scenario.tokens))
    positions = sorted(rng.sample(range(40, len(words) - 40), len(scenario.tokens)))
    for pos, token in zip(positions, scenario.tokens):
        words.insert(pos, token)
    return " ".join(words)


def _synonym_body(scenario: Scenario, doc_index: int) -> str:
    rng = random.Random(SEED + 7000 + doc_index)
    words = _filler(rng, 70)
    words.insert(20, scenario.synonym)
    words.insert(45, scenario.synonym)
    return " ".join(words)


def _distractor_body(context: str, doc_index: int) -> str:
    # long enough that length normalization keeps a single token occurrence
    # below the exact messages' summed keyword score
    rng = random.Random(SEED + 9000 + doc_index)
    lead = " ".join(_filler(rng, 90))
    tail = " ".join(_filler(rng, 90))
    return f"{lead} {context} {tail}"


def _decoy_body(doc_index: int) -> str:
    rng = random.Random(SEED + 3000 + doc_index)
    intro = DECOY_INTROS[doc_index % len(DECOY_INTROS)]
    phrases = list(DECOY_PHRASES)
    rng.shuffle(phrases)
    extra = " ".join(_filler(rng, 3))
    return f"{intro} {', '.join(phrases)} and {extra}"


def _background_body(doc_index: int) -> str:
    rng = random.Random(SEED + 5000 + doc_index)
    picks = [
        BACKGROUND_SENTENCES[(doc_index + j) % len(BACKGROUND_SENTENCES)]
        for j in range(3)
    ]
    extra = " ".join(_filler(rng, 12))
    return " ".join(picks) + " " + extra


@dataclass(frozen=True)
class DemoMessage:
    message_id: str
    subject: str
    body: str
    sender_index: int
    recipient_index: int
    sequence: int

    def raw(self) -> bytes:
        sender_name, sender_addr = _persona(self.sender_index)
        rcpt_name, rcpt_addr = _persona(self.recipient_index)
        lines = [
            f"Message-ID: <{self.message_id}>",
            f"Date: {_date_header(self.sequence)}",
            f"From: {sender_name} <{sender_addr}>",
            f"To: {rcpt_name} <{rcpt_addr}>",
            f"Subject: {self.subject}",
            "Mime-Version: 1.0",
            "Content-Type: text/plain; charset=us-ascii",
            "X-Folder: \\demo\\inbox",
            "X-Origin: demo-corpus",
            "",
            self.body,
            "",
        ]
        return "\n".join(lines).encode("utf-8")


def build_messages() -> tuple[list[DemoMessage], dict[str, frozenset[str]]]:
    """All 200 messages plus scenario name -> relevant message_id sets."""
    messages: list[DemoMessage] = []
    relevant: dict[str, set[str]] = {s.name: set() for s in SCENARIOS}
    seq = 0

    def add(message_id: str, subject: str, body: str) -> str:
        nonlocal seq
        messages.append(
            DemoMessage(
                message_id=message_id,
                subject=subject,
                body=body,
                sender_index=seq,
                recipient_index=seq + 5,
                sequence=seq,
            )
        )
        seq += 1
        return message_id

    for s_i, scenario in enumerate(SCENARIOS):
        for j in range(EXACT_PER_SCENARIO):
            mid = add(
                f"demo-{scenario.name}-exact-{j + 1}@corpus.local",
                "long operational rundown",
                _exact_body(scenario, s_i * 100 + j),
            )
            relevant[scenario.name].add(mid)
        for j, text in enumerate(scenario.paraphrases[:PARAPHRASE_PER_SCENARIO]):
            mid = add(
                f"demo-{scenario.name}-paraphrase-{j + 1}@corpus.local",
                "quick note",
                text,
            )
            relevant[scenario.name].add(mid)
        for j in range(SYNONYM_PER_SCENARIO):
            mid = add(
                f"demo-{scenario.name}-synonym-{j + 1}@corpus.local",
                "follow up",
                _synonym_body(scenario, s_i * 100 + j),
            )
            relevant[scenario.name].add(mid)
        for j, context in enumerate(
            scenario.distractor_contexts[:DISTRACTORS_PER_SCENARIO]
        ):
            add(
                f"demo-{scenario.name}-distractor-{j + 1}@corpus.local",
                "office notice",
                _distractor_body(context, s_i * 100 + j),
            )

    for j in range(DECOY_COUNT):
        add(f"demo-decoy-{j + 1:03d}@corpus.local", "clippings", _decoy_body(j))
    for j in range(BACKGROUND_COUNT):
        add(
            f"demo-background-{j + 1:02d}@corpus.local",
            "around the office",
            _background_body(j),
        )

    return messages, {name: frozenset(ids) for name, ids in relevant.items()}


def synonyms_text() -> str:
    lines = ["# one comma-separated group per line"]
    for scenario in SCENARIOS:
        lines.append(f"{scenario.synonym_of}, {scenario.synonym}")
    return "\n".join(lines) + "\n"


def scenarios_obj() -> dict:
    _, relevant = build_messages()
    return {
        "k": 100,
        "configs": ["lexical_only", "semantic_only", "hybrid"],
        "scenarios": [
            {
                "name": s.name,
                "query_text": s.query_text,
                "relevant": sorted(relevant[s.name]),
            }
            for s in SCENARIOS
        ],
    }


def write_corpus(out_dir: Path) -> dict:
    """Write messages/, synonyms.txt, and scenarios.json under out_dir."""
    out_dir = Path(out_dir)
    msg_dir = out_dir / "messages"
    msg_dir.mkdir(parents=True, exist_ok=True)
    messages, _ = build_messages()
    for i, message in enumerate(messages):
        (msg_dir / f"{i + 1:04d}.eml").write_bytes(message.raw())
    (out_dir / "synonyms.txt").write_text(synonyms_text(), encoding="utf-8")
    (out_dir / "scenarios.json").write_text(
        json.dumps(scenarios_obj(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return {"messages": len(messages), "directory": str(out_dir)}
