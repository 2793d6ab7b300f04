"""Synthesized-attribute evaluation, full and incremental.

A schema maps every grammar rule to a synthesis function.  The function
receives one entry per rhs symbol: the attribute dict of a nonterminal child
or the :class:`~incverify.parser.Token` of a terminal child, and returns the
attribute dict of the lhs node.

Values are cached on the nodes themselves (keyed by schema object), which is
what lets :func:`reevaluate` reuse everything off the edited spine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .grammar import Grammar
from .parser import Node, SyntaxTree

Synthesis = Callable[[Sequence[Any]], dict[str, Any]]
AttributeMap = dict[int, dict[str, Any]]


class SchemaError(Exception):
    """A synthesis function is missing or failed on some node."""

    def __init__(self, message: str, node_id: int | None = None, cause: Exception | None = None):
        self.node_id = node_id
        self.cause = cause
        super().__init__(message)


class AttributeSchema:
    def __init__(self, name: str, attributes: Mapping[str, Sequence[str]],
                 functions: Mapping[str, Synthesis]):
        self.name = name
        self.attributes = {k: tuple(v) for k, v in attributes.items()}
        self.functions = dict(functions)

    def check(self, grammar: Grammar) -> None:
        """Every rule needs a synthesis function; raise otherwise."""
        missing = [r.id for r in grammar.rules if r.id not in self.functions]
        if missing:
            raise SchemaError(f"schema {self.name!r} has no synthesis function for: {missing}")

    def synthesize(self, node: Node) -> dict[str, Any]:
        fn = self.functions.get(node.rule.id)
        if fn is None:
            raise SchemaError(f"no synthesis function for rule {node.rule.id!r}", node.id)
        args = [c.token if c.is_leaf else c.cache[self] for c in node.children]
        try:
            values = fn(args)
        except SchemaError:
            raise
        except Exception as exc:
            raise SchemaError(f"{self.name}: rule {node.rule.id!r} failed: {exc}", node.id, exc) from exc
        declared = self.attributes.get(node.symbol, ())
        return {name: values[name] for name in declared} if declared else dict(values)

    def __repr__(self) -> str:
        return f"AttributeSchema({self.name!r})"


def evaluate(tree: SyntaxTree, schema: AttributeSchema) -> AttributeMap:
    """Evaluate every internal node bottom-up, overwriting cached values."""
    out: AttributeMap = {}
    for node in tree.postorder():
        if node.is_leaf:
            continue
        node.cache[schema] = values = schema.synthesize(node)
        out[node.id] = values
    return out


def collect(tree: SyntaxTree, schema: AttributeSchema) -> AttributeMap:
    """The attribute map held in the node caches."""
    return {n.id: n.cache[schema] for n in tree.walk() if not n.is_leaf}


@dataclass
class RecomputeStats:
    recomputed: list[int] = field(default_factory=list)  # node ids, evaluation order
    attributes_recomputed: int = 0
    attributes_reused: int = 0
    cutoff_at: int | None = None  # node whose value came out unchanged

    def as_dict(self) -> dict:
        return {
            "recomputed_node_ids": list(self.recomputed),
            "attributes_recomputed": self.attributes_recomputed,
            "attributes_reused": self.attributes_reused,
            "cutoff_at": self.cutoff_at,
        }


def reevaluate(tree: SyntaxTree, schema: AttributeSchema, spliced: int | None,
               old_values: AttributeMap, replaced: int | None = None
               ) -> tuple[AttributeMap, RecomputeStats]:
    """Update attributes after a splice, walking the spine upward with cutoff.

    Inside the spliced subtree only nodes without a cached value are computed
    (reused inner subtrees keep theirs).  Above it, each ancestor is
    recomputed until one produces exactly its previous values; every node
    above that point keeps its old values.  ``replaced`` is the id the
    spliced subtree had in the old tree, when it differs (an old subtree
    moved into a new position).
    """
    stats = RecomputeStats()
    if spliced is None:
        result = collect(tree, schema)
        stats.attributes_reused = sum(len(v) for v in result.values())
        return result, stats

    parents = tree.parents()
    node = tree.nodes()[spliced]
    stack = [(node, False)]
    while stack:
        n, expanded = stack.pop()
        if n.is_leaf or schema in n.cache:
            continue
        if expanded:
            n.cache[schema] = schema.synthesize(n)
            stats.recomputed.append(n.id)
            stats.attributes_recomputed += len(n.cache[schema])
        else:
            stack.append((n, True))
            stack.extend((c, False) for c in n.children)

    current = node
    previous = replaced if replaced is not None else spliced
    while True:
        if previous in old_values and current.cache[schema] == old_values[previous]:
            stats.cutoff_at = current.id
            break
        parent = parents.get(current.id)
        if parent is None:
            break
        for child in parent.children:
            if not child.is_leaf and schema not in child.cache:
                # reused sibling that was never evaluated under this schema
                evaluate(SyntaxTree(child, 0), schema)
        parent.cache[schema] = schema.synthesize(parent)
        stats.recomputed.append(parent.id)
        stats.attributes_recomputed += len(parent.cache[schema])
        current = parent
        previous = parent.id

    if stats.cutoff_at is not None:
        up = parents.get(stats.cutoff_at)
        while up is not None:
            up.cache[schema] = old_values[up.id]
            up = parents.get(up.id)

    result = collect(tree, schema)
    recomputed = set(stats.recomputed)
    stats.attributes_reused = sum(len(v) for k, v in result.items() if k not in recomputed)
    return result, stats
