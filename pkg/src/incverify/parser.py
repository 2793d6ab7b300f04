"""Deterministic operator-precedence shift-reduce parsing into syntax trees.

Trees are built from :class:`Node` objects that carry a stable ``id`` and
know only their width in tokens; absolute spans are derived on demand.  This
lets an incremental edit reuse untouched subtrees by identity even when the
token positions to their right have shifted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .grammar import SENTINEL, Grammar, PrecedenceMatrix, Relation, Rule


@dataclass(frozen=True)
class Token:
    terminal: str
    lexeme: str
    pos: int | None = None  # character offset in the source, diagnostics only

    def same(self, other: "Token") -> bool:
        return self.terminal == other.terminal and self.lexeme == other.lexeme

    def __str__(self) -> str:
        return self.lexeme if self.lexeme == self.terminal else f"{self.terminal}({self.lexeme})"


class ParseError(Exception):
    """Syntax error; ``index`` is the offending token index (``len(tokens)`` at end of input)."""

    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"syntax error at token {index}: {message}")


class Node:
    __slots__ = ("id", "symbol", "rule", "children", "token", "width", "cache")

    def __init__(self, id: int, symbol: str, rule: Rule | None = None,
                 children: tuple["Node", ...] = (), token: Token | None = None):
        self.id = id
        self.symbol = symbol
        self.rule = rule
        self.children = children
        self.token = token
        self.width = 1 if token is not None else sum(c.width for c in children)
        self.cache: dict = {}

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def __repr__(self) -> str:
        if self.is_leaf:
            return f"Node({self.id}, {self.token})"
        return f"Node({self.id}, {self.rule})"


def leaf(id: int, token: Token) -> Node:
    return Node(id, token.terminal, token=token)


class SyntaxTree:
    """A parse tree plus the id counter used to mint fresh node identities."""

    def __init__(self, root: Node, next_id: int):
        self.root = root
        self.next_id = next_id

    def walk(self) -> Iterator[Node]:
        """Pre-order traversal."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def postorder(self) -> list[Node]:
        """Every node after all of its descendants."""
        out = list(self.walk())
        out.reverse()
        return out

    def leaves(self) -> list[Node]:
        return [n for n in self.walk() if n.is_leaf]

    @property
    def tokens(self) -> list[Token]:
        return [n.token for n in self.leaves()]

    def spans(self) -> dict[int, tuple[int, int]]:
        spans = {}
        stack = [(self.root, 0)]
        while stack:
            node, start = stack.pop()
            spans[node.id] = (start, start + node.width)
            offset = start
            for child in node.children:
                stack.append((child, offset))
                offset += child.width
        return spans

    def parents(self) -> dict[int, Node]:
        return {c.id: n for n in self.walk() for c in n.children}

    def nodes(self) -> dict[int, Node]:
        return {n.id: n for n in self.walk()}

    def __len__(self) -> int:
        return sum(1 for _ in self.walk())

    def signature(self):
        return signature(self.root)

    def dump(self) -> list[dict]:
        spans = self.spans()
        out = []
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            entry = {"id": node.id, "depth": depth, "span": list(spans[node.id])}
            if node.is_leaf:
                entry["terminal"] = node.token.terminal
                entry["lexeme"] = node.token.lexeme
            else:
                entry["rule"] = node.rule.id
            out.append(entry)
            stack.extend((c, depth + 1) for c in reversed(node.children))
        return out


def signature(node: Node):
    """Structural identity of a subtree: rules and leaf lexemes, ids ignored."""
    if node.is_leaf:
        return (node.token.terminal, node.token.lexeme)
    return (node.rule.id, tuple(signature(c) for c in node.children))


def precedence_between(opm: PrecedenceMatrix, a: str, b: str) -> Relation | None:
    return opm.get(a, b)


class NotLocal(Exception):
    """A sub-parse needed to look past its terminal context."""


class _Entry:
    __slots__ = ("node", "terminal", "rel")

    def __init__(self, node: Node | None, terminal: str | None, rel: Relation | None):
        self.node = node
        self.terminal = terminal  # None for nonterminal entries
        self.rel = rel  # relation with the terminal below, recorded at shift time


Builder = Callable[[Rule, tuple[Node, ...]], Node]


def shift_reduce(
    grammar: Grammar,
    opm: PrecedenceMatrix,
    leaves: Sequence[Node],
    left: str = SENTINEL,
    right: str = SENTINEL,
    build: Builder | None = None,
    offset: int = 0,
    on_reduce: Callable[[Node], None] | None = None,
) -> list[Node]:
    """Reduce ``leaves`` as far as possible inside the context ``left ... right``.

    Returns the nodes left between the two context terminals.  With the
    ``#`` sentinels on both sides this is a whole parse.  When a context is a
    real terminal, any step that would have to include it in a handle or
    shift it raises :class:`NotLocal`.
    """
    if build is None:
        counter = itertools.count()

        def build(rule, children):
            return Node(next(counter), rule.lhs, rule, children)

    local = left != SENTINEL or right != SENTINEL
    stack = [_Entry(None, left, None)]
    i = 0
    n = len(leaves)
    while True:
        top = len(stack) - 1 if stack[-1].terminal is not None else len(stack) - 2
        a = stack[top].terminal
        b = leaves[i].token.terminal if i < n else right
        if top == 0 and i == n:
            return [e.node for e in stack[1:]]
        rel = opm.get(a, b)
        if rel is None:
            raise ParseError(offset + i, f"no precedence relation between {a!r} and {b!r}")
        if i == n and rel is not Relation.TAKES:
            # the region would need the right context terminal in a handle
            raise NotLocal()
        if rel is Relation.TAKES:
            if top == 0:
                raise NotLocal()
            j = top
            while stack[j].rel is Relation.EQUAL:
                j -= 1
                while stack[j].terminal is None:
                    j -= 1
            assert j > 0, "shift never records ≐ against the bottom context"
            # stack[j] holds the first terminal of the handle; a nonterminal directly
            # below it belongs to the handle as well
            start = j - 1 if stack[j - 1].terminal is None else j
            handle = stack[start:]
            rhs = tuple(e.node.symbol for e in handle)
            rules = grammar.rules_for_rhs(rhs)
            if not rules:
                raise ParseError(offset + i, f"no rule for handle {' '.join(rhs)}")
            assert len(rules) == 1, f"ambiguous handle {rhs}: grammar is not invertible"
            node = build(rules[0], tuple(e.node for e in handle))
            if on_reduce is not None:
                on_reduce(node)
            del stack[start:]
            stack.append(_Entry(node, None, None))
        else:
            if top == 0 and rel is Relation.EQUAL and local:
                raise NotLocal()
            stack.append(_Entry(leaves[i], b, rel))
            i += 1


def parse(grammar: Grammar, opm: PrecedenceMatrix, tokens: Sequence[Token]) -> SyntaxTree:
    """Parse a complete token sequence (implicitly wrapped in ``#``).

    Node ids are minted in shift/reduce order, so the same input always yields
    the same ids.
    """
    for k, tok in enumerate(tokens):
        if tok.terminal not in grammar.terminals:
            raise ParseError(k, f"unknown terminal {tok.terminal!r}")
    counter = itertools.count()
    minted: dict[int, Node] = {}

    class LazyLeaves:
        def __len__(self):
            return len(tokens)

        def __getitem__(self, k):
            node = minted.get(k)
            if node is None:
                node = minted[k] = leaf(next(counter), tokens[k])
            return node

    def build(rule, children):
        return Node(next(counter), rule.lhs, rule, children)

    rest = shift_reduce(grammar, opm, LazyLeaves(), build=build)
    root = finish_root(grammar, rest, build, len(tokens))
    return SyntaxTree(root, next(counter))


def finish_root(grammar: Grammar, rest: list[Node], build: Builder, end: int) -> Node:
    """Close a whole-input parse: apply an axiom renaming or the axiom's empty rule."""
    if not rest:
        rules = grammar.rules_for_rhs(())
        if not rules:
            raise ParseError(0, "empty input")
        return build(rules[0], ())
    if len(rest) != 1:
        raise ParseError(end, "input does not reduce to a single phrase")
    node = rest[0]
    if node.symbol == grammar.axiom:
        return node
    for rule in grammar.rules_for_rhs((node.symbol,)):
        if rule.lhs == grammar.axiom:
            return build(rule, (node,))
    raise ParseError(end, f"phrase {node.symbol} is not derivable from {grammar.axiom}")
