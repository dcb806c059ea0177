"""Retrieval quality measurement and the ablation runner.

Recall@K is the fraction of the gold-relevant documents that appear in the
top K of a ranking; it is undefined (and raises) when the gold set is empty.
Precision@K divides the relevant-and-retrieved count by the number of slots
actually fillable, min(K, len(ranking)), and is 0.0 for an empty ranking.

The ablation runner executes every scenario under every retrieval
configuration and writes two artifacts: results.csv for machines and
results.txt for eyes. Both are deterministic down to the byte for a fixed
corpus, because every stage underneath (tokenizing, hashing, graph
construction, fusion, tie-breaks) is seeded or order-free.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .engine import CaseEngine
from .errors import InvalidFusionConfig
from .fusion import MODES, FusionConfig
from .querydsl import Request, parse_request
from .translate import RuleBasedTranslator, translate_and_audit

DEFAULT_K = 100

CANONICAL_CONFIGS = ("lexical_only", "semantic_only", "hybrid")


def recall_at_k(ranked_ids: Sequence[str], relevant: set[str], k: int) -> float:
    """|top-k intersect relevant| / |relevant|; relevant must be non-empty."""
    if not relevant:
        raise ValueError("recall is undefined for an empty relevant set")
    if k <= 0:
        return 0.0
    top = set(ranked_ids[:k])
    return len(top & relevant) / len(relevant)


def precision_at_k(ranked_ids: Sequence[str], relevant: set[str], k: int) -> float:
    """|top-k intersect relevant| / min(k, |ranking|); 0.0 for empty ranking."""
    if k <= 0 or not ranked_ids:
        return 0.0
    top = ranked_ids[:k]
    return len(set(top) & relevant) / min(k, len(ranked_ids))


@dataclass(frozen=True)
class EvalScenario:
    """One gold-labeled retrieval task."""

    name: str
    relevant: frozenset[str]
    query_text: str = ""
    dsl: Optional[dict] = None

    def __post_init__(self):
        if not self.relevant:
            raise ValueError(f"scenario {self.name} has an empty relevant set")
        if bool(self.query_text) == (self.dsl is not None):
            raise ValueError(
                f"scenario {self.name} needs exactly one of query_text, dsl"
            )


@dataclass(frozen=True)
class EvalRow:
    scenario: str
    config: str
    k: int
    recall: float
    precision: float
    relevant: int
    retrieved: int


@dataclass
class AblationResult:
    rows: list[EvalRow] = field(default_factory=list)

    def by_scenario(self) -> dict[str, dict[str, EvalRow]]:
        out: dict[str, dict[str, EvalRow]] = {}
        for row in self.rows:
            out.setdefault(row.scenario, {})[row.config] = row
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["scenario", "config", "k", "recall", "precision", "relevant", "retrieved"]
        )
        for row in self.rows:
            writer.writerow(
                [
                    row.scenario,
                    row.config,
                    row.k,
                    f"{row.recall:.6f}",
                    f"{row.precision:.6f}",
                    row.relevant,
                    row.retrieved,
                ]
            )
        return buf.getvalue()

    def table_text(self) -> str:
        lines = [
            f"{'scenario':<24} {'config':<14} {'k':>4} {'recall':>8} {'precision':>10}"
        ]
        lines.append("-" * len(lines[0]))
        for row in self.rows:
            lines.append(
                f"{row.scenario:<24} {row.config:<14} {row.k:>4} "
                f"{row.recall:>8.4f} {row.precision:>10.4f}"
            )
        return "\n".join(lines) + "\n"


def _scenario_request(scenario: EvalScenario, engine: CaseEngine) -> Request:
    if scenario.dsl is not None:
        return parse_request(scenario.dsl)
    outcome = translate_and_audit(
        scenario.query_text, RuleBasedTranslator(), engine.schema
    )
    return outcome.request


def run_ablation(
    engine: CaseEngine,
    scenarios: Sequence[EvalScenario],
    configs: Sequence[str] = CANONICAL_CONFIGS,
    k: int = DEFAULT_K,
    out_dir: Optional[Path] = None,
) -> AblationResult:
    """Execute scenarios x configs; optionally write results.csv/results.txt.

    The configs list must cover the three canonical modes so ablations stay
    comparable across runs.
    """
    missing = [name for name in CANONICAL_CONFIGS if name not in configs]
    if missing:
        raise InvalidFusionConfig(
            f"ablation configs must include {', '.join(missing)}"
        )
    for name in configs:
        if name not in MODES:
            raise InvalidFusionConfig(f"unknown config {name!r}")

    result = AblationResult()
    for scenario in scenarios:
        request = _scenario_request(scenario, engine)
        request = dataclasses.replace(request, size=k, from_=0)
        for config_name in configs:
            search = engine.search(request, MODES[config_name])
            ranked = [hit.doc_id for hit in search.hits]
            result.rows.append(
                EvalRow(
                    scenario=scenario.name,
                    config=config_name,
                    k=k,
                    recall=recall_at_k(ranked, set(scenario.relevant), k),
                    precision=precision_at_k(ranked, set(scenario.relevant), k),
                    relevant=len(scenario.relevant),
                    retrieved=len(ranked),
                )
            )

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "results.csv").write_text(result.csv_text(), encoding="utf-8")
        (out_dir / "results.txt").write_text(result.table_text(), encoding="utf-8")
    return result


def load_scenarios(path: Path) -> tuple[list[EvalScenario], dict]:
    """Read a scenarios file: {"scenarios": [...], "k"?, "configs"?}."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    scenarios = []
    for obj in payload["scenarios"]:
        scenarios.append(
            EvalScenario(
                name=obj["name"],
                relevant=frozenset(obj["relevant"]),
                query_text=obj.get("query_text", ""),
                dsl=obj.get("dsl"),
            )
        )
    options = {
        "k": payload.get("k", DEFAULT_K),
        "configs": payload.get("configs", list(CANONICAL_CONFIGS)),
    }
    return scenarios, options
