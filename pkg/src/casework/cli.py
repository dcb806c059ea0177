"""Command-line entry points.

Subcommands:

* ``ingest``      parse a directory of raw messages into an index directory
* ``serve``       run the case service over an existing index
* ``eval run``    execute a scenarios file and write ablation artifacts
* ``demo-corpus`` write the bundled labeled corpus for experimentation
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import load_synonym_file
from .demo_corpus import write_corpus
from .engine import CaseEngine
from .evaluation import load_scenarios, run_ablation
from .ingest import ingest_directory


def _cmd_ingest(args: argparse.Namespace) -> int:
    index_dir = Path(args.index)
    if (index_dir / "manifest.json").exists():
        engine = CaseEngine.load(index_dir)
    else:
        synonyms = (
            load_synonym_file(Path(args.synonyms)) if args.synonyms else None
        )
        engine = (
            CaseEngine(synonyms=synonyms) if synonyms is not None else CaseEngine()
        )
    report = ingest_directory(
        engine,
        Path(args.source),
        queue_dir=Path(args.queue) if args.queue else None,
    )
    engine.save(index_dir)
    print(json.dumps(report.to_obj(), indent=2, sort_keys=True))
    return 1 if report.failures and not report.indexed else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    from .translate import RemoteTranslator

    engine = CaseEngine.load(Path(args.index))
    translator = None
    url = args.translator_url or os.environ.get("CASEWORK_TRANSLATOR_URL", "")
    if url:
        translator = RemoteTranslator(url)
    app = create_app(engine, Path(args.journals), translator=translator)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_eval_run(args: argparse.Namespace) -> int:
    engine = CaseEngine.load(Path(args.index))
    scenarios, options = load_scenarios(Path(args.scenarios))
    result = run_ablation(
        engine,
        scenarios,
        configs=options["configs"],
        k=options["k"],
        out_dir=Path(args.out),
    )
    sys.stdout.write(result.table_text())
    return 0


def _cmd_demo_corpus(args: argparse.Namespace) -> int:
    info = write_corpus(Path(args.out))
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casework", description="investigative email search workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="index a directory of raw messages")
    p_ingest.add_argument("--source", required=True, help="directory of message files")
    p_ingest.add_argument("--index", required=True, help="index directory to create or extend")
    p_ingest.add_argument("--synonyms", default="", help="synonym groups file")
    p_ingest.add_argument("--queue", default="", help="job queue directory")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the case service")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--journals", required=True, help="journal directory")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8800)
    p_serve.add_argument("--translator-url", default="", help="remote translator endpoint")
    p_serve.set_defaults(func=_cmd_serve)

    p_eval = sub.add_parser("eval", help="retrieval quality tools")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)
    p_eval_run = eval_sub.add_parser("run", help="run scenarios and write results")
    p_eval_run.add_argument("--index", required=True)
    p_eval_run.add_argument("--scenarios", required=True, help="scenarios json file")
    p_eval_run.add_argument("--out", required=True, help="artifact directory")
    p_eval_run.set_defaults(func=_cmd_eval_run)

    p_demo = sub.add_parser("demo-corpus", help="write the bundled labeled corpus")
    p_demo.add_argument("--out", required=True)
    p_demo.set_defaults(func=_cmd_demo_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
