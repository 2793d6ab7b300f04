"""Context-free grammars in operator form and their precedence matrices.

A grammar is *operator* when no right-hand side places two nonterminals next
to each other.  For such grammars a terminal-by-terminal table of precedence
relations (the operator precedence matrix) can be derived mechanically; when
every cell holds at most one relation the grammar is an operator precedence
grammar and can be parsed deterministically by shift-reduce, one local
decision at a time.

The matrix is built with the classical Floyd construction from the leftmost
and rightmost terminal sets of each nonterminal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

SENTINEL = "#"


class Relation(enum.Enum):
    YIELDS = "<"
    EQUAL = "="
    TAKES = ">"

    def __str__(self) -> str:
        return self.value


class GrammarError(ValueError):
    """Raised for structurally malformed grammars."""


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    id: str = ""

    def __post_init__(self):
        if not self.id:
            object.__setattr__(self, "id", rule_label(self.lhs, self.rhs))

    def __str__(self) -> str:
        return self.id


def rule_label(lhs: str, rhs: Sequence[str]) -> str:
    return f"{lhs} ::= {' '.join(rhs) if rhs else 'ε'}"


@dataclass(frozen=True)
class Grammar:
    nonterminals: frozenset[str]
    terminals: frozenset[str]
    rules: tuple[Rule, ...]
    axiom: str
    _by_rhs: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nonterminals & self.terminals:
            raise GrammarError(
                f"symbols declared both terminal and nonterminal: {sorted(self.nonterminals & self.terminals)}"
            )
        if SENTINEL in self.terminals or SENTINEL in self.nonterminals:
            raise GrammarError(f"{SENTINEL!r} is reserved for the input sentinel")
        if self.axiom not in self.nonterminals:
            raise GrammarError(f"axiom {self.axiom!r} is not a nonterminal")
        symbols = self.nonterminals | self.terminals
        by_rhs: dict[tuple[str, ...], list[Rule]] = {}
        for rule in self.rules:
            if rule.lhs not in self.nonterminals:
                raise GrammarError(f"rule {rule} has a non-nonterminal lhs")
            unknown = [s for s in rule.rhs if s not in symbols]
            if unknown:
                raise GrammarError(f"rule {rule} uses undeclared symbols {unknown}")
            if not rule.rhs and rule.lhs != self.axiom:
                raise GrammarError(f"empty rule {rule} allowed only for the axiom")
            by_rhs.setdefault(rule.rhs, []).append(rule)
        object.__setattr__(self, "_by_rhs", by_rhs)

    @classmethod
    def from_rules(
        cls,
        axiom: str,
        productions: Iterable[tuple[str, Sequence[str]]],
        terminals: Iterable[str],
    ) -> "Grammar":
        """Build a grammar from ``(lhs, rhs)`` pairs; nonterminals are the lhs symbols."""
        productions = [(lhs, tuple(rhs)) for lhs, rhs in productions]
        nonterminals = frozenset(lhs for lhs, _ in productions)
        rules = tuple(Rule(lhs, rhs) for lhs, rhs in productions)
        return cls(nonterminals, frozenset(terminals), rules, axiom)

    def is_terminal(self, symbol: str) -> bool:
        return symbol in self.terminals

    def rules_for_rhs(self, rhs: tuple[str, ...]) -> list[Rule]:
        return self._by_rhs.get(rhs, [])

    def rule(self, rule_id: str) -> Rule:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)


@dataclass(frozen=True)
class Violation:
    rule: Rule | None
    kind: str
    detail: str
    position: int | None = None

    def __str__(self) -> str:
        where = f" at position {self.position}" if self.position is not None else ""
        return f"{self.kind}: {self.rule}{where}: {self.detail}"


def validate_operator_form(grammar: Grammar) -> list[Violation]:
    """Return one violation per pair of adjacent nonterminals (empty list = ok)."""
    found = []
    for rule in grammar.rules:
        for i in range(len(rule.rhs) - 1):
            a, b = rule.rhs[i], rule.rhs[i + 1]
            if a in grammar.nonterminals and b in grammar.nonterminals:
                found.append(Violation(rule, "adjacent-nonterminals", f"{a} {b}", i))
    return found


def validate_fnf(grammar: Grammar) -> list[Violation]:
    """Check the Fischer normal form clauses; returns every violation found."""
    found = []
    for rhs, rules in grammar._by_rhs.items():
        if len(rules) > 1:
            names = ", ".join(r.id for r in rules)
            found.append(Violation(rules[0], "not-invertible", f"rules share rhs: {names}"))
    for rule in grammar.rules:
        if grammar.axiom in rule.rhs:
            found.append(
                Violation(rule, "axiom-in-rhs", f"axiom {grammar.axiom} occurs in a rhs",
                          rule.rhs.index(grammar.axiom))
            )
        if not rule.rhs and rule.lhs != grammar.axiom:
            found.append(Violation(rule, "empty-rule", "only the axiom may derive ε"))
        if len(rule.rhs) == 1 and rule.rhs[0] in grammar.nonterminals and rule.lhs != grammar.axiom:
            found.append(Violation(rule, "renaming", "renaming rules must have the axiom as lhs"))
    return found


def terminal_border_sets(grammar: Grammar) -> dict[str, tuple[frozenset[str], frozenset[str]]]:
    """Leftmost and rightmost terminal sets for each nonterminal (least fixpoint)."""
    left: dict[str, set[str]] = {n: set() for n in grammar.nonterminals}
    right: dict[str, set[str]] = {n: set() for n in grammar.nonterminals}
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            if _border_step(grammar, rule, left, right):
                changed = True
    return {n: (frozenset(left[n]), frozenset(right[n])) for n in grammar.nonterminals}


def _border_step(grammar, rule, left, right) -> bool:
    rhs = rule.rhs
    if not rhs:
        return False
    before = len(left[rule.lhs]) + len(right[rule.lhs])
    nts = grammar.nonterminals
    # Operator form: at most one nonterminal before the first terminal.
    first = rhs[0]
    if first in nts:
        left[rule.lhs] |= left[first]
        if len(rhs) > 1:
            left[rule.lhs].add(rhs[1])
    else:
        left[rule.lhs].add(first)
    last = rhs[-1]
    if last in nts:
        right[rule.lhs] |= right[last]
        if len(rhs) > 1:
            right[rule.lhs].add(rhs[-2])
    else:
        right[rule.lhs].add(last)
    return len(left[rule.lhs]) + len(right[rule.lhs]) != before


@dataclass(frozen=True)
class PrecedenceMatrix:
    """Conflict-free terminal-by-terminal precedence table, sentinel included."""

    terminals: frozenset[str]
    entries: Mapping[tuple[str, str], Relation]

    def get(self, a: str, b: str) -> Relation | None:
        return self.entries.get((a, b))

    def core_entries(self) -> dict[tuple[str, str], Relation]:
        """Entries that do not involve the sentinel."""
        return {k: v for k, v in self.entries.items() if SENTINEL not in k}

    def table(self) -> str:
        cols = sorted(self.terminals) + [SENTINEL]
        width = max(len(c) for c in cols) + 1
        lines = [" " * width + "".join(c.rjust(width) for c in cols)]
        for a in cols:
            cells = [str(self.get(a, b) or "").rjust(width) for b in cols]
            lines.append(a.rjust(width) + "".join(cells))
        return "\n".join(lines)


@dataclass(frozen=True)
class Conflict:
    cell: tuple[str, str]
    relations: frozenset[Relation]

    def __str__(self) -> str:
        rels = " ".join(sorted(str(r) for r in self.relations))
        return f"({self.cell[0]}, {self.cell[1]}): {rels}"


class PrecedenceConflictError(GrammarError):
    """The grammar is not an operator precedence grammar."""

    def __init__(self, conflicts: list[Conflict]):
        self.conflicts = conflicts
        super().__init__("precedence conflicts: " + "; ".join(map(str, conflicts)))


def compute_opm(grammar: Grammar) -> PrecedenceMatrix:
    """Derive the precedence matrix; raises :class:`PrecedenceConflictError` on conflicts."""
    violations = validate_operator_form(grammar)
    if violations:
        raise GrammarError("grammar is not in operator form: " + "; ".join(map(str, violations)))
    borders = terminal_border_sets(grammar)
    nts = grammar.nonterminals
    cells: dict[tuple[str, str], set[Relation]] = {}

    def put(a, b, rel):
        cells.setdefault((a, b), set()).add(rel)

    for rule in grammar.rules:
        rhs = rule.rhs
        for i, sym in enumerate(rhs):
            if sym in nts:
                continue
            # a ≐ b across at most one (transparent) nonterminal
            if i + 1 < len(rhs) and rhs[i + 1] not in nts:
                put(sym, rhs[i + 1], Relation.EQUAL)
            if i + 2 < len(rhs) and rhs[i + 1] in nts and rhs[i + 2] not in nts:
                put(sym, rhs[i + 2], Relation.EQUAL)
            if i + 1 < len(rhs) and rhs[i + 1] in nts:
                for b in borders[rhs[i + 1]][0]:
                    put(sym, b, Relation.YIELDS)
            if i > 0 and rhs[i - 1] in nts:
                for a in borders[rhs[i - 1]][1]:
                    put(a, sym, Relation.TAKES)

    for t in grammar.terminals:
        put(SENTINEL, t, Relation.YIELDS)
        put(t, SENTINEL, Relation.TAKES)

    conflicts = [
        Conflict(cell, frozenset(rels))
        for cell, rels in sorted(cells.items())
        if len(rels) > 1
    ]
    if conflicts:
        raise PrecedenceConflictError(conflicts)
    entries = {cell: next(iter(rels)) for cell, rels in sorted(cells.items())}
    return PrecedenceMatrix(grammar.terminals, entries)
