"""Arithmetic expressions over naturals with ``+`` and ``*``: the demo front end."""

from __future__ import annotations

import re

from .attributes import AttributeSchema, evaluate
from .grammar import Grammar, compute_opm
from .parser import ParseError, SyntaxTree, Token, parse

GRAMMAR = Grammar.from_rules(
    "S",
    [
        ("S", ["A"]),
        ("S", ["B"]),
        ("A", ["A", "+", "B"]),
        ("A", ["B", "+", "B"]),
        ("B", ["B", "*", "n"]),
        ("B", ["n"]),
    ],
    terminals=["n", "+", "*"],
)
OPM = compute_opm(GRAMMAR)

_TOKEN = re.compile(r"\s*(?:(\d+)|([+*]))")


class LexError(ValueError):
    def __init__(self, pos: int, char: str):
        self.pos = pos
        self.char = char
        super().__init__(f"unexpected character {char!r} at offset {pos}")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LexError(pos, text[pos])
        if m.group(1):
            tokens.append(Token("n", m.group(1), m.start(1)))
        else:
            tokens.append(Token(m.group(2), m.group(2), m.start(2)))
        pos = m.end()
    return tokens


def _value(kids):
    return {"value": kids[0]["value"]}


VALUE_SCHEMA = AttributeSchema(
    "value",
    {"S": ["value"], "A": ["value"], "B": ["value"]},
    {
        "S ::= A": _value,
        "S ::= B": _value,
        "A ::= A + B": lambda k: {"value": k[0]["value"] + k[2]["value"]},
        "A ::= B + B": lambda k: {"value": k[0]["value"] + k[2]["value"]},
        "B ::= B * n": lambda k: {"value": k[0]["value"] * int(k[2].lexeme)},
        "B ::= n": lambda k: {"value": int(k[0].lexeme)},
    },
)
VALUE_SCHEMA.check(GRAMMAR)


def parse_expr(text: str) -> SyntaxTree:
    return parse(GRAMMAR, OPM, tokenize(text))


def eval_expr(text: str) -> int:
    tree = parse_expr(text)
    return evaluate(tree, VALUE_SCHEMA)[tree.root.id]["value"]


__all__ = ["GRAMMAR", "OPM", "VALUE_SCHEMA", "tokenize", "parse_expr", "eval_expr",
           "LexError", "ParseError"]
