"""Whole-program and two-version verification runs producing JSON-ready reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import mini
from .attributes import SchemaError, evaluate, reevaluate
from .incremental import apply_edit, diff_to_edit
from .parser import SyntaxTree
from .probexpr import ProbExpr
from .reliability import ReliabilityProfile, reliability_schema
from . import reliability as rel
from . import safety as saf

REPORT_VERSION = 1


def format_probability(value: ProbExpr) -> dict:
    if value.is_constant:
        exact: Fraction = value.value()
        return {"decimal": "%#.12g" % float(exact), "exact": f"{exact.numerator}/{exact.denominator}",
                "symbolic": None}
    return {"decimal": None, "exact": None, "symbolic": str(value)}


@dataclass
class Run:
    """One analysed program version plus the state needed to re-verify it incrementally."""
    tree: SyntaxTree
    schema: Any
    values: dict
    tuples: int = 0


@dataclass
class Analysis:
    schema_name: str
    profile: ReliabilityProfile | None = None
    automaton: saf.PropertyAutomaton | None = None
    unroll: int = saf.DEFAULT_UNROLL
    _image: saf.ImageAutomaton | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.schema_name == "reliability":
            if self.profile is None:
                raise ValueError("the reliability schema needs a profile")
        elif self.schema_name == "safety":
            if self.automaton is None:
                raise ValueError("the safety schema needs an automaton")
            self._image = saf.image_automaton(self.automaton)
        else:
            raise ValueError(f"unknown schema {self.schema_name!r}")

    def new_schema(self):
        if self.schema_name == "reliability":
            return reliability_schema(self.profile)
        return saf.safety_schema(self._image, self.unroll)

    def run(self, tree: SyntaxTree) -> Run:
        schema = self.new_schema()
        values = self._evaluate(lambda: evaluate(tree, schema), tree)
        tally = getattr(schema, "tally", None)
        return Run(tree, schema, values, tally.count if tally else 0)

    def _evaluate(self, thunk, tree):
        try:
            return thunk()
        except SchemaError as exc:
            if self.schema_name == "reliability":
                raise rel.unwrap_error(exc, tree) from exc
            if isinstance(exc.cause, saf.AlphabetError):
                raise exc.cause from exc
            raise

    def outcome(self, run: Run) -> dict:
        if self.schema_name == "reliability":
            res = rel.result_from(run.tree, self.profile, run.values)
            return {"value": format_probability(res.value), "warnings": res.warnings}
        res = saf.result_from(run.tree, self.automaton, run.values, run.tuples)
        return {
            "verdict": res.verdict,
            "witness": saf.format_steps(res.witness) if res.witness is not None else None,
            "tuples_processed": res.tuples_processed,
            "warnings": res.warnings,
        }

    def violated(self, run: Run) -> bool:
        if self.schema_name != "safety":
            return False
        return not saf.verdict_from(run.values[run.tree.root.id]["gamma"], self.automaton.initial)[0]

    def update(self, old: Run, new_tree: SyntaxTree, spliced: int | None,
               replaced: int | None = None) -> tuple[Run, Any]:
        """Re-evaluate ``new_tree`` reusing the attributes cached by ``old``."""
        schema = old.schema
        tally = getattr(schema, "tally", None)
        before = tally.count if tally else 0
        values, stats = self._evaluate(lambda: reevaluate(new_tree, schema, spliced, old.values, replaced), new_tree)
        tuples = (tally.count - before) if tally else 0
        return Run(new_tree, schema, values, tuples), stats


def read_program(path: str | Path) -> SyntaxTree:
    return mini.parse_program(Path(path).read_text(encoding="utf-8"))


def verify_report(path: str, analysis: Analysis) -> tuple[dict, int]:
    t0 = time.perf_counter()
    tree = read_program(path)
    run = analysis.run(tree)
    report = {
        "report_version": REPORT_VERSION,
        "command": "verify",
        "schema": analysis.schema_name,
        "program": str(path),
    }
    report.update(analysis.outcome(run))
    report["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return report, 1 if analysis.violated(run) else 0


def diff_verify_report(old_path: str, new_path: str, analysis: Analysis) -> tuple[dict, int]:
    t0 = time.perf_counter()
    old_tree = read_program(old_path)
    old_run = analysis.run(old_tree)
    new_tokens = mini.tokenize(Path(new_path).read_text(encoding="utf-8"))
    edit = diff_to_edit(old_tree.tokens, new_tokens)
    new_tree, reuse = apply_edit(old_tree, edit, mini.GRAMMAR, mini.OPM)
    new_run, recompute = analysis.update(old_run, new_tree, reuse.spliced, reuse.replaced)

    numbers = mini.node_numbering(new_tree)
    recompute_info = recompute.as_dict()
    recompute_info["recomputed_nodes"] = [numbers[i] for i in recompute.recomputed if i in numbers]
    reuse_info = reuse.as_dict()
    reuse_info["edit"] = {
        "start": edit.start,
        "end": edit.end,
        "replacement": [t.lexeme for t in edit.replacement],
    }
    report = {
        "report_version": REPORT_VERSION,
        "command": "diff-verify",
        "schema": analysis.schema_name,
        "programs": {"old": str(old_path), "new": str(new_path)},
        "old": analysis.outcome(old_run),
        "new": analysis.outcome(new_run),
        "reuse": reuse_info,
        "recompute": recompute_info,
    }
    report["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return report, 1 if analysis.violated(new_run) else 0
