"""The Mini language: lexer, operator-precedence grammar and condition sub-language.

Mini has global boolean variables, zero-argument boolean functions, and the
usual structured statements.  Conditions of ``if``/``while`` are lexed as a
single ``COND`` token holding their verbatim text and analysed separately by
:func:`parse_condition`.

An identifier immediately followed by ``(`` is a function name (``FUNC``),
any other identifier is a variable (``VAR``).
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .grammar import Grammar, compute_opm
from .parser import Node, SyntaxTree, Token, parse

KEYWORDS = frozenset(
    ["begin", "end", "if", "then", "else", "endif", "while", "do", "endwhile", "true", "false"]
)
VAR, FUNC, COND = "VAR", "FUNC", "COND"

GRAMMAR = Grammar.from_rules(
    "S",
    [
        ("S", ["begin", "stmtlist", "end"]),
        ("stmtlist", ["stmt", ";", "stmtlist"]),
        ("stmtlist", ["stmt", ";"]),
        ("stmt", ["function-id", "(", ")"]),
        ("stmt", ["var-id", ":=", "true"]),
        ("stmt", ["var-id", ":=", "false"]),
        ("stmt", ["var-id", ":=", "function-id", "(", ")"]),
        ("stmt", ["if", "cond", "then", "stmtlist", "else", "stmtlist", "endif"]),
        ("stmt", ["while", "cond", "do", "stmtlist", "endwhile"]),
        ("var-id", [VAR]),
        ("function-id", [FUNC]),
        ("cond", [COND]),
    ],
    terminals=sorted(KEYWORDS | {";", "(", ")", ":=", VAR, FUNC, COND}),
)
OPM = compute_opm(GRAMMAR)

# rule ids, for schemas
R_PROGRAM = "S ::= begin stmtlist end"
R_SEQ = "stmtlist ::= stmt ; stmtlist"
R_LAST = "stmtlist ::= stmt ;"
R_CALL = "stmt ::= function-id ( )"
R_SET_TRUE = "stmt ::= var-id := true"
R_SET_FALSE = "stmt ::= var-id := false"
R_ASSIGN_CALL = "stmt ::= var-id := function-id ( )"
R_IF = "stmt ::= if cond then stmtlist else stmtlist endif"
R_WHILE = "stmt ::= while cond do stmtlist endwhile"
R_VAR = f"var-id ::= {VAR}"
R_FUNC = f"function-id ::= {FUNC}"
R_COND = f"cond ::= {COND}"

# terminals that get a number in the pre-order node numbering
_NUMBERED_LEAVES = frozenset([VAR, FUNC, COND, "true", "false"])


class LexError(ValueError):
    def __init__(self, pos: int, char: str, message: str | None = None):
        self.pos = pos
        self.char = char
        super().__init__(message or f"unexpected character {char!r} at offset {pos}")


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SPACE = re.compile(r"\s*")


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while True:
        pos = _SPACE.match(source, pos).end()
        if pos >= n:
            return tokens
        m = _IDENT.match(source, pos)
        if m:
            word = m.group()
            if word in KEYWORDS:
                tokens.append(Token(word, word, pos))
                pos = m.end()
                if word in ("if", "while"):
                    pos = _condition(source, pos, "then" if word == "if" else "do", tokens)
                continue
            after = _SPACE.match(source, m.end()).end()
            kind = FUNC if source.startswith("(", after) else VAR
            tokens.append(Token(kind, word, pos))
            pos = m.end()
        elif source.startswith(":=", pos):
            tokens.append(Token(":=", ":=", pos))
            pos += 2
        elif source[pos] in ";()":
            tokens.append(Token(source[pos], source[pos], pos))
            pos += 1
        else:
            raise LexError(pos, source[pos])


def _condition(source: str, pos: int, closer: str, tokens: list[Token]) -> int:
    m = re.compile(rf"\b{closer}\b").search(source, pos)
    if m is None:
        raise LexError(pos, source[pos:pos + 1], f"condition starting at offset {pos} has no {closer!r}")
    start = _SPACE.match(source, pos).end()
    text = source[start:m.start()].rstrip()
    if not text:
        raise LexError(start, source[start:start + 1], f"empty condition at offset {start}")
    tokens.append(Token(COND, text, start))
    return m.start()


def untokenize(tokens: list[Token]) -> str:
    return " ".join(t.lexeme for t in tokens)


def parse_program(source: str) -> SyntaxTree:
    return parse(GRAMMAR, OPM, tokenize(source))


def node_numbering(tree: SyntaxTree) -> dict[int, int]:
    """Pre-order numbers over nonterminal nodes and value-carrying leaves.

    Punctuation and keyword leaves are skipped, which reproduces the usual
    numbered-tree presentation (22 nodes for the two-version example).
    Maps node id to number.
    """
    numbers = {}
    for node in tree.walk():
        if node.is_leaf and node.token.terminal not in _NUMBERED_LEAVES:
            continue
        numbers[node.id] = len(numbers)
    return numbers


def by_node_number(tree: SyntaxTree) -> dict[int, Node]:
    nodes = tree.nodes()
    return {num: nodes[nid] for nid, num in node_numbering(tree).items()}


# -- conditions ----------------------------------------------------------------

@dataclass(frozen=True)
class VarEqTrue:
    var: str

    def __str__(self):
        return f"{self.var}==true"


@dataclass(frozen=True)
class VarEqFalse:
    var: str

    def __str__(self):
        return f"{self.var}==false"


@dataclass(frozen=True)
class Not:
    arg: "CondExpr"

    def __str__(self):
        inner = str(self.arg)
        return f"!{inner}" if isinstance(self.arg, (Not, Placeholder)) else f"!({inner})"


@dataclass(frozen=True)
class And:
    left: "CondExpr"
    right: "CondExpr"

    def __str__(self):
        return f"{self.left} && {_paren_and(self.right)}"


@dataclass(frozen=True)
class Placeholder:
    def __str__(self):
        return "*"


CondExpr = Union[VarEqTrue, VarEqFalse, Not, And, Placeholder]


def _paren_and(e):
    return f"({e})" if isinstance(e, And) else str(e)


class CondSyntaxError(ValueError):
    def __init__(self, pos: int, message: str):
        self.pos = pos
        super().__init__(f"condition syntax error at offset {pos}: {message}")


_COND_TOKEN = re.compile(r"\s*(&&|==|!|\(|\)|\*|[A-Za-z_][A-Za-z0-9_]*)")


def _lex_condition(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _COND_TOKEN.match(text, pos)
        if not m:
            stripped = _SPACE.match(text, pos).end()
            raise CondSyntaxError(stripped, f"unexpected {text[stripped]!r}")
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


@functools.lru_cache(maxsize=1024)
def parse_condition(text: str) -> CondExpr:
    """Parse ``v==true``, ``v==false``, ``!e``/``not e``, ``e && e``/``e and e``, ``( e )``, ``*``."""
    toks = _lex_condition(text)
    k = 0

    def peek():
        return toks[k][0] if k < len(toks) else None

    def where():
        return toks[k][1] if k < len(toks) else len(text)

    def take(expected=None):
        nonlocal k
        if k >= len(toks):
            raise CondSyntaxError(len(text), f"expected {expected or 'more input'}")
        tok = toks[k][0]
        if expected is not None and tok != expected:
            raise CondSyntaxError(toks[k][1], f"expected {expected!r}, found {tok!r}")
        k += 1
        return tok

    def conjunction():
        e = unary()
        while peek() in ("&&", "and"):
            take()
            e = And(e, unary())
        return e

    def unary():
        if peek() in ("!", "not"):
            take()
            return Not(unary())
        return atom()

    def atom():
        tok = peek()
        if tok == "(":
            take()
            e = conjunction()
            take(")")
            return e
        if tok == "*":
            take()
            return Placeholder()
        if tok is None or not _IDENT.fullmatch(tok) or tok in KEYWORDS or tok in ("and", "not"):
            raise CondSyntaxError(where(), f"expected a variable, found {tok!r}")
        var = take()
        take("==")
        value = peek()
        if value == "true":
            take()
            return VarEqTrue(var)
        if value == "false":
            take()
            return VarEqFalse(var)
        raise CondSyntaxError(where(), f"expected true or false, found {value!r}")

    expr = conjunction()
    if k != len(toks):
        raise CondSyntaxError(toks[k][1], f"unexpected {toks[k][0]!r}")
    return expr


def condition_variables(e: CondExpr) -> frozenset[str]:
    if isinstance(e, (VarEqTrue, VarEqFalse)):
        return frozenset([e.var])
    if isinstance(e, Not):
        return condition_variables(e.arg)
    if isinstance(e, And):
        return condition_variables(e.left) | condition_variables(e.right)
    return frozenset()


def has_placeholder(e: CondExpr) -> bool:
    if isinstance(e, Placeholder):
        return True
    if isinstance(e, Not):
        return has_placeholder(e.arg)
    if isinstance(e, And):
        return has_placeholder(e.left) or has_placeholder(e.right)
    return False


def shared_conjunct_variables(e: CondExpr) -> frozenset[str]:
    """Variables read by both operands of some ``&&`` (the product rule assumes independence)."""
    if isinstance(e, Not):
        return shared_conjunct_variables(e.arg)
    if isinstance(e, And):
        both = condition_variables(e.left) & condition_variables(e.right)
        return both | shared_conjunct_variables(e.left) | shared_conjunct_variables(e.right)
    return frozenset()


def cond_truth_probability(e: CondExpr, lookup: Callable[[str], object], placeholder):
    """Probability that ``e`` holds, built from per-variable truth probabilities.

    ``lookup`` returns the probability (number or symbolic expression) that a
    variable is true; ``placeholder`` is the probability for ``*``.
    """
    if isinstance(e, VarEqTrue):
        return lookup(e.var)
    if isinstance(e, VarEqFalse):
        return 1 - lookup(e.var)
    if isinstance(e, Not):
        return 1 - cond_truth_probability(e.arg, lookup, placeholder)
    if isinstance(e, And):
        return (cond_truth_probability(e.left, lookup, placeholder)
                * cond_truth_probability(e.right, lookup, placeholder))
    return placeholder


def cond_evaluate(e: CondExpr, vm: Mapping[str, bool]) -> bool | None:
    """Kleene three-valued evaluation; ``None`` means unknown."""
    if isinstance(e, VarEqTrue):
        v = vm.get(e.var)
        return None if v is None else v
    if isinstance(e, VarEqFalse):
        v = vm.get(e.var)
        return None if v is None else not v
    if isinstance(e, Not):
        v = cond_evaluate(e.arg, vm)
        return None if v is None else not v
    if isinstance(e, And):
        left = cond_evaluate(e.left, vm)
        if left is False:
            return False
        right = cond_evaluate(e.right, vm)
        if right is False:
            return False
        if left is None or right is None:
            return None
        return True
    return None
