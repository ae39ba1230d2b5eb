"""Command-line surface.

Exit codes: 0 success, 1 domain error (single `category: message` line on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .app import AppContext
from .config import AppConfig
from .errors import IdeaForgeError
from .ideation import IdeaRecord


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ideaforge")
    parser.add_argument("--config", help="path to budget.toml-style config")
    parser.add_argument("--store", help="override store directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="ingest papers into the store")
    group = p_ingest.add_mutually_exclusive_group(required=True)
    group.add_argument("--source", help="configured conference source name")
    group.add_argument("--local", help="directory of .txt/.pdf fixtures")
    p_ingest.add_argument("--limit", type=int)

    p_tree = sub.add_parser("tree", help="build or show the topic tree")
    tree_sub = p_tree.add_subparsers(dest="tree_command", required=True)
    p_build = tree_sub.add_parser("build")
    p_build.add_argument("--topics", type=int)
    tree_sub.add_parser("show")

    p_ideate = sub.add_parser("ideate", help="select a topic pair and draft an abstract")
    p_ideate.add_argument("--mode", required=True,
                          choices=["distant", "random", "all", "manual"])
    p_ideate.add_argument("--topics", help="manual mode pair, e.g. 0,2")
    p_ideate.add_argument("--seed", type=int)

    p_refine = sub.add_parser("refine", help="ground and polish an idea")
    p_refine.add_argument("idea_id")
    p_refine.add_argument("--rounds", type=int, default=1)

    p_review = sub.add_parser("review", help="automated peer review of an idea")
    p_review.add_argument("idea_id")

    p_proc = sub.add_parser("procedure", help="experimental procedure for an idea")
    p_proc.add_argument("idea_id")

    p_combine = sub.add_parser("combine", help="combine the top-k unique ideas pairwise")
    p_combine.add_argument("--top", type=int, default=10)

    p_qa = sub.add_parser("qa", help="answer a question over the corpus")
    p_qa.add_argument("question")

    p_sum = sub.add_parser("summarize", help="summarize a stored paper")
    p_sum.add_argument("paper_id")

    p_eval = sub.add_parser("eval", help="judge ideas and report mean scores")
    p_eval.add_argument("--ideas", required=True, help="comma-separated idea ids")
    p_eval.add_argument("--corpus", help="held-out collection name")
    p_eval.add_argument("--exemplars", required=True,
                        help="JSON file of {abstract, scores} exemplars")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8700)
    return parser


def _context(args) -> AppContext:
    config_path = args.config
    if config_path is None and Path("budget.toml").is_file():
        config_path = "budget.toml"
    cfg = AppConfig.load(config_path)
    if args.store:
        cfg.store_dir = Path(args.store).resolve()
    return AppContext(cfg)


def _print_idea(record: IdeaRecord):
    print(json.dumps({
        "id": record.id,
        "stage": record.stage,
        "pair": record.pair.to_dict(),
        "title": record.title,
    }, ensure_ascii=False))


def _run(args) -> int:
    ctx = _context(args)
    if args.command == "ingest":
        stats = ctx.op_ingest(local_dir=args.local, source=args.source,
                              limit=args.limit)
        print(json.dumps(stats))
    elif args.command == "tree":
        if args.tree_command == "build":
            tree = ctx.op_tree_build(args.topics)
            print(f"built tree with {len(tree.topics)} topics -> {ctx.tree_path()}")
        else:
            print(ctx.op_tree_show())
    elif args.command == "ideate":
        topics = None
        if args.topics:
            parts = args.topics.split(",")
            if len(parts) != 2:
                raise IdeaForgeError("--topics expects two indices, e.g. 0,2")
            topics = (int(parts[0]), int(parts[1]))
        for record in ctx.op_ideate(args.mode, topics=topics, seed=args.seed):
            _print_idea(record)
    elif args.command == "refine":
        result = ctx.op_refine(args.idea_id, rounds=args.rounds)
        _print_idea(result["idea"])
        if result["empty_harvest"]:
            print("warning: empty reference harvest, polished without grounding",
                  file=sys.stderr)
    elif args.command == "review":
        report = ctx.op_review(args.idea_id)
        print(json.dumps(report.to_dict(), ensure_ascii=False))
    elif args.command == "procedure":
        plan = ctx.op_procedure(args.idea_id)
        print(json.dumps(plan.to_dict(), ensure_ascii=False))
    elif args.command == "combine":
        combined = ctx.op_combine(args.top)
        print(f"combined {len(combined)} idea pairs")
    elif args.command == "qa":
        answer = ctx.op_qa(args.question)
        print(answer.text)
        print("sources: " + ", ".join(answer.source_ids), file=sys.stderr)
    elif args.command == "summarize":
        print(ctx.op_summarize(args.paper_id))
    elif args.command == "eval":
        result = ctx.op_eval(args.ideas.split(","), args.exemplars,
                             corpus=args.corpus)
        print(result["report"], end="")
    elif args.command == "serve":
        from .service import serve
        serve(lambda: _context(args), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    try:
        return _run(args)
    except IdeaForgeError as exc:
        print(f"{exc.category}: {exc.message}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"validation-error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
