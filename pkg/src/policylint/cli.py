"""Command-line entry point.

Subcommands: analyze, rules validate, train, decision add, serve. All
analysis is deterministic given the same inputs and --as-of, so machine
output diffs cleanly between runs.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from .classifier import load_clauses_file, load_model, predict, save_model, train
from .errors import PolicyLintError
from .pipeline import AnalysisConfig, Pipeline
from .reporting import render
from .rules import compile_rules, load_rules_file
from .store import KnowledgeStore, load_decisions_file


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policylint",
        description="GDPR compliance checks for privacy documents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze one or more policy files")
    analyze.add_argument("paths", nargs="+", metavar="PATH")
    analyze.add_argument("--lang", default="en", metavar="TAG")
    analyze.add_argument("--jurisdiction", default="EU", metavar="CODE")
    analyze.add_argument("--as-of", dest="as_of", default=None, metavar="DATE")
    analyze.add_argument(
        "--granularity", choices=["sentence", "paragraph"], default="sentence"
    )
    analyze.add_argument("--rules", default=None, metavar="FILE")
    analyze.add_argument("--checklist", default=None, metavar="FILE")
    analyze.add_argument("--lexicon", default=None, metavar="FILE")
    analyze.add_argument("--model", default=None, metavar="FILE")
    analyze.add_argument(
        "--format", choices=["machine", "html", "plain"], default="plain"
    )
    analyze.add_argument("--strict", action="store_true",
                         help="exit 2 when any unlawful finding is present")
    analyze.add_argument("--store", default=None, metavar="DIR",
                         help="knowledge store directory (persists reports, applies feedback weights)")
    analyze.add_argument("--jurisdictions", default=None, metavar="FILE")
    analyze.add_argument("--sim-threshold", type=float, default=0.6)
    analyze.add_argument("--tau", type=float, default=0.8)
    analyze.add_argument("--no-context", action="store_true",
                         help="disable the list-intro context guard")
    analyze.add_argument("--gate", type=float, default=0.0,
                         help="minimum composite score for exit 0")

    rules_cmd = sub.add_parser("rules", help="rule file utilities")
    rules_sub = rules_cmd.add_subparsers(dest="rules_command", required=True)
    validate = rules_sub.add_parser("validate", help="validate a rule file")
    validate.add_argument("file", metavar="FILE")

    train_cmd = sub.add_parser("train", help="train the clause classifier")
    train_cmd.add_argument("corpus", metavar="CORPUS")
    train_cmd.add_argument("--out", required=True, metavar="FILE")
    train_cmd.add_argument("--alpha", type=float, default=1.0, metavar="A")

    decision = sub.add_parser("decision", help="knowledge store decisions")
    decision_sub = decision.add_subparsers(dest="decision_command", required=True)
    add = decision_sub.add_parser("add", help="record decisions from a file")
    add.add_argument("file", metavar="FILE")
    add.add_argument("--store", default="store", metavar="DIR")

    serve = sub.add_parser("serve", help="run the review HTTP service")
    serve.add_argument("--port", type=int, default=8000, metavar="P")
    serve.add_argument("--store", default="store", metavar="DIR")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--rules", default=None, metavar="FILE")
    serve.add_argument("--checklist", default=None, metavar="FILE")
    serve.add_argument("--lexicon", default=None, metavar="FILE")
    serve.add_argument("--model", default=None, metavar="FILE")
    serve.add_argument("--lang", default="en", metavar="TAG")
    serve.add_argument("--jurisdiction", default="EU", metavar="CODE")
    return parser


def cmd_analyze(args) -> int:
    as_of = date.fromisoformat(args.as_of) if args.as_of else None
    config = AnalysisConfig(
        language=args.lang,
        jurisdiction=args.jurisdiction,
        as_of=as_of,
        granularity=args.granularity,
        sim_threshold=args.sim_threshold,
        tau=args.tau,
        use_context=not args.no_context,
    )
    store = KnowledgeStore(args.store) if args.store else None
    pipeline = Pipeline.build(
        config,
        rules_path=args.rules,
        checklist_path=args.checklist,
        lexicon_path=args.lexicon,
        jurisdictions_path=args.jurisdictions,
        model_path=args.model,
        store=store,
    )
    exit_code = 0
    for path in args.paths:
        raw = Path(path).read_text(encoding="utf-8")
        is_html = Path(path).suffix.lower() in (".html", ".htm")
        _, report = pipeline.analyze(raw, is_html=is_html)
        sys.stdout.write(render(report, args.format))
        if report.composite < args.gate:
            exit_code = max(exit_code, 2)
        if args.strict and report.counts.unlawful > 0:
            exit_code = max(exit_code, 2)
    return exit_code


def cmd_rules_validate(args) -> int:
    ruleset = compile_rules(load_rules_file(args.file))
    print(f"ok, {len(ruleset)} rules")
    return 0


def cmd_train(args) -> int:
    corpus = load_clauses_file(args.corpus)
    model = train(corpus, alpha=args.alpha)
    save_model(model, args.out)
    reloaded = load_model(args.out)
    check = predict(reloaded, corpus[0].text)  # cheap reload sanity pass
    assert abs(sum(check.values()) - 1.0) < 1e-9
    print(
        f"trained: {len(model.labels)} labels, {len(model.vocabulary)} tokens, "
        f"alpha={model.alpha}, saved to {args.out}"
    )
    return 0


def cmd_decision_add(args) -> int:
    store = KnowledgeStore(args.store)
    decisions = load_decisions_file(args.file)
    for decision in decisions:
        affected = store.record_decision(decision)
        ids = ", ".join(affected) if affected else "none"
        print(f"{decision.decision_id}: {decision.disposition} -> affected rules: {ids}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        rules_path=args.rules,
        checklist_path=args.checklist,
        lexicon_path=args.lexicon,
        model_path=args.model,
        language=args.lang,
        jurisdiction=args.jurisdiction,
    )
    app = create_app(args.store, config)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "rules":
            return cmd_rules_validate(args)
        if args.command == "train":
            return cmd_train(args)
        if args.command == "decision":
            return cmd_decision_add(args)
        if args.command == "serve":
            return cmd_serve(args)
    except PolicyLintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
