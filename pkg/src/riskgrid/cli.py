"""riskctl: command-line front end for assessment, comparison, and KB upkeep.

Exit codes: 0 on success, 2 on any input problem (unreadable file,
syntax error, failed validation, version conflict).  Reports are built
completely before anything is printed, so an error never leaves partial
output behind.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .engine import EvalMode, EvalTypeError, parse_mode
from .kb import (
    EventKind,
    KBError,
    KBStore,
    KnowledgeBase,
    SeedError,
    VersionConflict,
    describe_event,
    kb_from_rulebase,
    load_seeded_kb,
    make_event,
)
from .parser import ParseError, RulebaseError, parse_rulebase
from .project import ProjectError, assess_project, compare_scenarios
from .projectfile import parse_project
from .report import render_comparison, render_report
from .rules import lint_rulebase, quote, serialize_rule
from .scale import ScaleLevel, parse_level

DEFAULT_DATA_DIR = "riskgrid-data"
DATA_DIR_ENV = "RISKGRID_DATA"


def data_dir(args: argparse.Namespace) -> Path:
    if args.data:
        return Path(args.data)
    return Path(os.environ.get(DATA_DIR_ENV, DEFAULT_DATA_DIR))


def kb_store(args: argparse.Namespace) -> KBStore:
    if args.kb:
        return KBStore(args.kb)
    return KBStore(data_dir(args) / "kb")


def load_kb(args: argparse.Namespace) -> KnowledgeBase:
    """Resolve the knowledge base for read-only commands.

    --kb may name a KB store directory or a bare rulebase file (loaded
    read-only at version 1).  Without --kb, the data directory's store is
    used when present, else the packaged seed.
    """
    if args.kb:
        path = Path(args.kb)
        if path.is_file():
            return kb_from_rulebase(
                parse_rulebase(_read_file(args.kb)),
                note=f"loaded from {path.name}")
        store = KBStore(path)
        if not store.exists():
            raise KBError(f"no knowledge base at {args.kb}")
        return store.load()
    store = KBStore(data_dir(args) / "kb")
    if store.exists():
        return store.load()
    return load_seeded_kb()


def require_store(args: argparse.Namespace) -> KBStore:
    if args.kb and Path(args.kb).is_file():
        raise KBError(
            f"{args.kb} is a bare rulebase file; KB updates need a store "
            f"directory (run 'riskctl init')")
    store = kb_store(args)
    if not store.exists():
        raise KBError(
            f"no knowledge base in {store.directory}; run 'riskctl init' first")
    return store


def _fail(messages: list[str]) -> "SystemExit":
    for message in messages:
        print(f"error: {message}", file=sys.stderr)
    return SystemExit(2)


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise KBError(f"cannot read {path}: {exc.strerror or exc}") from None


# ----------------------------------------------------------------- commands


def cmd_init(args: argparse.Namespace) -> int:
    store = kb_store(args)
    kb = store.init()
    print(f"seeded knowledge base (version {kb.version}) in {store.directory}")
    print(f"  {len(kb.rulebase.factors)} factors, "
          f"{len(kb.rulebase.rules)} rules, {len(kb.rulebase.risks)} risks")
    return 0


def cmd_assess(args: argparse.Namespace) -> int:
    kb = load_kb(args)
    project = parse_project(_read_file(args.project), kb.rulebase.factors)
    report = assess_project(project, kb.rulebase, args.threshold, args.mode)
    sys.stdout.write(render_report(report, kb.rulebase, kb.version, args.format))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    kb = load_kb(args)
    variants = [parse_project(_read_file(path), kb.rulebase.factors)
                for path in args.projects]
    comparison = compare_scenarios(variants, kb.rulebase, args.threshold,
                                   args.mode)
    sys.stdout.write(
        render_comparison(comparison, kb.rulebase, kb.version, args.format))
    return 0


def cmd_kb_confirm(args: argparse.Namespace) -> int:
    return _commit_retrospective(args, EventKind.CONFIRM)


def cmd_kb_refute(args: argparse.Namespace) -> int:
    return _commit_retrospective(args, EventKind.REFUTE)


def _commit_retrospective(args: argparse.Namespace, kind: EventKind) -> int:
    store = require_store(args)
    kb = store.commit(make_event(kind, target=str(args.rule_id),
                                 note=args.note))
    rule = kb.rulebase.rule(args.rule_id)
    print(f"rule {args.rule_id} {kind.value}ed; confidence "
          f"{rule.confidence.confirmations}/{rule.confidence.refutations}; "
          f"kb version {kb.version}")
    return 0


def cmd_kb_add_rule(args: argparse.Namespace) -> int:
    store = require_store(args)
    line = args.rule
    if args.desc:
        line += f" desc={quote(args.desc)}"
    if args.prov:
        line += f" prov={quote(args.prov)}"
    kb = store.commit(make_event(EventKind.ADD_RULE, note=args.note,
                                 rule=line))
    new_rule = kb.rulebase.rules[-1]
    print(f"added rule {new_rule.rule_id}; kb version {kb.version}")
    return 0


def cmd_kb_modify(args: argparse.Namespace) -> int:
    store = require_store(args)
    old_rule = store.load().rulebase.rule(args.rule_id)
    kb = store.commit(make_event(
        EventKind.MODIFY, target=str(args.rule_id), note=args.note,
        old=serialize_rule(old_rule), new=args.rule))
    print(f"modified rule {args.rule_id}; kb version {kb.version}")
    return 0


def cmd_kb_retire(args: argparse.Namespace) -> int:
    store = require_store(args)
    kb = store.commit(make_event(EventKind.RETIRE_RULE,
                                 target=str(args.rule_id), note=args.note))
    print(f"retired rule {args.rule_id}; kb version {kb.version}")
    return 0


def cmd_kb_log(args: argparse.Namespace) -> int:
    kb = load_kb(args)
    for version, event in enumerate(kb.changelog, start=1):
        print(describe_event(event, version))
    return 0


def cmd_kb_show(args: argparse.Namespace) -> int:
    kb = load_kb(args)
    sys.stdout.write(kb.rulebase.serialize())
    return 0


def cmd_kb_lint(args: argparse.Namespace) -> int:
    kb = load_kb(args)
    warnings = lint_rulebase(kb.rulebase)
    for warning in warnings:
        print(warning)
    if not warnings:
        print("no warnings")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(kb_store(args), data_dir(args), ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# -------------------------------------------------------------------- wiring


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="data directory "
                        f"(default: ${DATA_DIR_ENV} or ./{DEFAULT_DATA_DIR})")
    parser.add_argument("--kb", help="knowledge-base directory "
                        "(default: <data>/kb; falls back to the packaged seed "
                        "for read-only commands)")


def _add_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-t", "--threshold", type=parse_level,
                        default=ScaleLevel.HIGH,
                        help="report rules at or above this relevance "
                             "(default: high)")
    parser.add_argument("-m", "--mode", type=parse_mode,
                        default=EvalMode.STRICT,
                        help="strict (unassessed factors make rules "
                             "indeterminate) or assume_nominal (default: strict)")
    parser.add_argument("--format", choices=("text", "json", "csv"),
                        default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskctl",
        description="Identify and rank project-specific risks of distributed "
                    "development, and compare work-allocation scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a data directory with the seeded "
                                    "knowledge base")
    _add_common(p)
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("assess", help="evaluate one project and report its "
                                      "relevant rules")
    _add_common(p)
    _add_eval_flags(p)
    p.add_argument("-p", "--project", required=True, help="project file")
    p.set_defaults(fn=cmd_assess)

    p = sub.add_parser("compare", help="compare allocation variants "
                                       "side by side")
    _add_common(p)
    _add_eval_flags(p)
    p.add_argument("projects", nargs="+", metavar="PROJECT",
                   help="two or more project files sharing one task set")
    p.set_defaults(fn=cmd_compare)

    kb = sub.add_parser("kb", help="inspect and update the knowledge base")
    kb_sub = kb.add_subparsers(dest="kb_command", required=True)

    for name, fn in (("confirm", cmd_kb_confirm), ("refute", cmd_kb_refute),
                     ("retire", cmd_kb_retire)):
        p = kb_sub.add_parser(name)
        _add_common(p)
        p.add_argument("rule_id", type=int)
        p.add_argument("--note", default="")
        p.set_defaults(fn=fn)

    p = kb_sub.add_parser("add-rule")
    _add_common(p)
    p.add_argument("rule", help="rule line: '<id>: <expr> -> <effects>' with "
                                "the next free id")
    p.add_argument("--desc", default="", help="textual explanation")
    p.add_argument("--prov", default="", help="provenance note")
    p.add_argument("--note", default="")
    p.set_defaults(fn=cmd_kb_add_rule)

    p = kb_sub.add_parser("modify")
    _add_common(p)
    p.add_argument("rule_id", type=int)
    p.add_argument("rule", help="replacement rule line with the same id")
    p.add_argument("--note", default="")
    p.set_defaults(fn=cmd_kb_modify)

    for name, fn in (("log", cmd_kb_log), ("show", cmd_kb_show),
                     ("lint", cmd_kb_lint)):
        p = kb_sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--ui", help="directory with the built browser client, "
                               "mounted at / (e.g. frontend/)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except RulebaseError as exc:
        raise _fail([str(issue) for issue in exc.issues])
    except ProjectError as exc:
        raise _fail(exc.problems)
    except VersionConflict as exc:
        raise _fail([str(exc)])
    except (ParseError, KBError, SeedError, EvalTypeError) as exc:
        raise _fail([str(exc)])
    except OSError as exc:
        raise _fail([str(exc)])
    except ValueError as exc:
        raise _fail([str(exc)])


if __name__ == "__main__":
    raise SystemExit(main())
