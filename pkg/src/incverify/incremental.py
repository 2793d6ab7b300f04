"""Incremental re-parsing of operator-precedence syntax trees.

An edit replaces a token range.  Starting from the smallest subtree that
covers it, the edited region is re-parsed in isolation between its two
neighbouring terminals.  If it reduces to the same nonterminal as before,
the new subtree is spliced in and parsing stops; otherwise the region grows
to the parent subtree.  Leaves outside the edit and inner subtrees rebuilt
with identical children keep their node identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .grammar import SENTINEL, Grammar, PrecedenceMatrix
from .parser import Node, NotLocal, ParseError, SyntaxTree, Token, finish_root, leaf, shift_reduce


@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    replacement: tuple[Token, ...] = ()

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad edit range [{self.start}, {self.end})")
        object.__setattr__(self, "replacement", tuple(self.replacement))

    @property
    def is_empty(self) -> bool:
        return self.start == self.end and not self.replacement

    def apply(self, tokens: Sequence[Token]) -> list[Token]:
        if self.end > len(tokens):
            raise ValueError(f"edit range [{self.start}, {self.end}) exceeds {len(tokens)} tokens")
        return list(tokens[:self.start]) + list(self.replacement) + list(tokens[self.end:])


@dataclass
class ReuseStats:
    tokens_reparsed: int = 0
    nodes_rebuilt: int = 0
    nodes_reused: int = 0
    subcontext: tuple[int, int] | None = None  # re-parsed range in the new stream
    attempts: int = 0
    spliced: int | None = None  # id of the spliced subtree root in the new tree
    replaced: int | None = None  # id of the subtree it replaced in the old tree

    def as_dict(self) -> dict:
        return {
            "tokens_reparsed": self.tokens_reparsed,
            "nodes_rebuilt": self.nodes_rebuilt,
            "nodes_reused": self.nodes_reused,
            "subcontext": list(self.subcontext) if self.subcontext else None,
            "attempts": self.attempts,
        }


def matching_condition(old: str, new: str, context: tuple[str, str] | None = None) -> bool:
    """The re-parsed region derives from the same nonterminal as before."""
    return old == new


def diff_to_edit(old: Sequence[Token], new: Sequence[Token]) -> Edit:
    """Single edit from common prefix and suffix of the two token streams."""
    n = min(len(old), len(new))
    p = 0
    while p < n and old[p].same(new[p]):
        p += 1
    s = 0
    while s < n - p and old[len(old) - 1 - s].same(new[len(new) - 1 - s]):
        s += 1
    return Edit(p, len(old) - s, tuple(new[p:len(new) - s]))


def _covering(tree: SyntaxTree, spans, edit: Edit) -> Node:
    node = tree.root
    while True:
        for child in node.children:
            if child.is_leaf:
                continue
            start, end = spans[child.id]
            if start <= edit.start and edit.end <= end and (start < end or edit.is_empty):
                node = child
                break
        else:
            return node


def apply_edit(old: SyntaxTree, edit: Edit, grammar: Grammar, opm: PrecedenceMatrix
               ) -> tuple[SyntaxTree, ReuseStats]:
    """Return the edited tree and what was reused; the old tree is left intact."""
    old_tokens = old.tokens
    new_tokens = edit.apply(old_tokens)
    stats = ReuseStats()
    if edit.is_empty:
        stats.nodes_reused = len(old)
        return old, stats

    spans = old.spans()
    parents = old.parents()
    old_leaves = old.leaves()
    delta = len(edit.replacement) - (edit.end - edit.start)
    counter = itertools.count(old.next_id)
    fresh: dict[int, Node] = {}

    def leaf_at(k: int) -> Node:
        # k indexes the new stream
        if k < edit.start:
            return old_leaves[k]
        if k >= edit.start + len(edit.replacement):
            return old_leaves[k - delta]
        node = fresh.get(k)
        if node is None:
            node = fresh[k] = leaf(next(counter), new_tokens[k])
        return node

    def build(rule, children):
        first = children[0]
        prev = parents.get(first.id)
        if (prev is not None and prev.rule is rule and len(prev.children) == len(children)
                and all(a is b for a, b in zip(prev.children, children))):
            return prev
        return Node(next(counter), rule.lhs, rule, children)

    node = _covering(old, spans, edit)
    while True:
        start, end = spans[node.id]
        new_end = end + delta
        region = [leaf_at(k) for k in range(start, new_end)]
        stats.tokens_reparsed += len(region)
        stats.attempts += 1
        is_root = node is old.root
        left = new_tokens[start - 1].terminal if start > 0 else SENTINEL
        right = new_tokens[new_end].terminal if new_end < len(new_tokens) else SENTINEL
        try:
            rest = shift_reduce(grammar, opm, region, left, right, build, offset=start)
            if is_root:
                replacement = finish_root(grammar, rest, build, len(new_tokens))
            elif len(rest) == 1 and matching_condition(node.symbol, rest[0].symbol, (left, right)):
                replacement = rest[0]
            else:
                replacement = None
        except (NotLocal, ParseError):
            if is_root:
                raise
            replacement = None
        if replacement is not None:
            break
        node = parents[node.id]

    stats.subcontext = (start, new_end)
    if replacement.id >= old.next_id and not any(n is node for n in SyntaxTree(replacement, 0).walk()):
        # the new subtree takes over the identity of the one it replaces,
        # unless that one lives on inside it (an insertion in front of it)
        replacement.id = node.id
    stats.replaced = node.id
    stats.spliced = replacement.id

    new_root = replacement
    child, cur = replacement, node
    while cur.id in parents:
        parent = parents[cur.id]
        kids = tuple(child if c is cur else c for c in parent.children)
        new_root = Node(parent.id, parent.symbol, parent.rule, kids)
        child, cur = new_root, parent

    tree = SyntaxTree(new_root, next(counter))
    old_ids = {id(n) for n in old.walk()}
    for n in tree.walk():
        if id(n) in old_ids:
            stats.nodes_reused += 1
        else:
            stats.nodes_rebuilt += 1
    return tree, stats
