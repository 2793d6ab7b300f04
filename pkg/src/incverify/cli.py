"""Command-line entry point: ``incverify parse|eval-expr|verify|diff-verify``.

Exit codes: 0 success (safe, or a value was computed), 1 the safety property
is violated, 2 usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import arith, mini
from .attributes import SchemaError
from .parser import ParseError
from .reliability import DivergenceError, ProfileError, ReliabilityProfile
from .safety import DEFAULT_UNROLL, AlphabetError, AutomatonError, PropertyAutomaton
from .verify import Analysis, diff_verify_report, verify_report

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def _error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def _text_dump(tree, numbers) -> str:
    lines = []
    for entry in tree.dump():
        label = entry.get("rule") or f"{entry['terminal']} {entry['lexeme']!r}"
        num = numbers.get(entry["id"])
        tag = f"[{num}] " if num is not None else ""
        lines.append(f"{'  ' * entry['depth']}{tag}{label}  #{entry['id']} {tuple(entry['span'])}")
    return "\n".join(lines)


def cmd_parse(args) -> int:
    tree = mini.parse_program(Path(args.file).read_text(encoding="utf-8"))
    numbers = mini.node_numbering(tree)
    if args.format == "json":
        nodes = tree.dump()
        for entry in nodes:
            entry["number"] = numbers.get(entry["id"])
        out = {"root": {"id": tree.root.id, "rule": tree.root.rule.id},
               "numbered_nodes": len(numbers), "nodes": nodes}
        print(json.dumps(out, indent=2))
    else:
        print(_text_dump(tree, numbers))
    return EXIT_OK


def cmd_eval_expr(args) -> int:
    print(arith.eval_expr(args.expression))
    return EXIT_OK


def _analysis(args) -> Analysis:
    if args.schema == "reliability":
        if not args.profile:
            raise _Usage("--schema reliability requires --profile")
        return Analysis("reliability", profile=ReliabilityProfile.load(args.profile))
    if not args.automaton:
        raise _Usage("--schema safety requires --automaton")
    if args.unroll < 0:
        raise _Usage("--unroll must be non-negative")
    return Analysis("safety", automaton=PropertyAutomaton.load(args.automaton), unroll=args.unroll)


class _Usage(Exception):
    pass


def cmd_verify(args) -> int:
    report, code = verify_report(args.file, _analysis(args))
    print(json.dumps(report, indent=2))
    return code


def cmd_diff_verify(args) -> int:
    report, code = diff_verify_report(args.old, args.new, _analysis(args))
    print(json.dumps(report, indent=2))
    return code


def _add_schema_flags(p):
    p.add_argument("--schema", choices=["reliability", "safety"], required=True)
    p.add_argument("--profile", help="reliability profile (JSON)")
    p.add_argument("--automaton", help="property automaton (JSON)")
    p.add_argument("--unroll", type=int, default=DEFAULT_UNROLL, metavar="K",
                   help=f"loop unrolling bound for the safety schema (default {DEFAULT_UNROLL})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="incverify", description="Incremental syntactic-semantic verification of Mini programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a Mini program and dump its tree")
    p.add_argument("file")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval-expr", help="evaluate an arithmetic expression with the demo schema")
    p.add_argument("expression")
    p.set_defaults(func=cmd_eval_expr)

    p = sub.add_parser("verify", help="verify one Mini program")
    p.add_argument("file")
    _add_schema_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diff-verify", help="verify a program, then its new version incrementally")
    p.add_argument("old")
    p.add_argument("new")
    _add_schema_flags(p)
    p.set_defaults(func=cmd_diff_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        return _error(str(exc))
    except OSError as exc:
        return _error(f"{exc.filename}: {exc.strerror}")
    except ParseError as exc:
        return _error(str(exc))
    except (mini.LexError, arith.LexError, mini.CondSyntaxError) as exc:
        return _error(str(exc))
    except (ProfileError, AutomatonError, AlphabetError, DivergenceError, SchemaError) as exc:
        return _error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
