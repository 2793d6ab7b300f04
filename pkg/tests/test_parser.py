import pytest

from incverify import arith
from incverify.grammar import SENTINEL
from incverify.parser import NotLocal, ParseError, Token, leaf, parse, shift_reduce


def n(v):
    return ("B ::= n", (("n", str(v)),))


def test_arith_tree_shape():
    tree = arith.parse_expr("5*4+2+6*7*8")
    b54 = ("B ::= B * n", (n(5), ("*", "*"), ("n", "4")))
    b67 = ("B ::= B * n", (n(6), ("*", "*"), ("n", "7")))
    b678 = ("B ::= B * n", (b67, ("*", "*"), ("n", "8")))
    a1 = ("A ::= B + B", (b54, ("+", "+"), n(2)))
    a2 = ("A ::= A + B", (a1, ("+", "+"), b678))
    assert tree.signature() == ("S ::= A", (a2,))


def test_single_number_uses_renaming_to_axiom():
    tree = arith.parse_expr("7")
    assert tree.signature() == ("S ::= B", (n(7),))


@pytest.mark.parametrize("text, index", [("5+", 2), ("+5", 2), ("5 5", 1), ("5**4", 2)])
# precedence parsing reports a bad handle when it is reduced, at the lookahead
def test_syntax_errors_carry_token_index(text, index):
    with pytest.raises(ParseError) as info:
        arith.parse_expr(text)
    assert info.value.index == index


def test_empty_input_is_error_at_zero():
    with pytest.raises(ParseError) as info:
        arith.parse_expr("")
    assert info.value.index == 0


def test_unknown_terminal():
    with pytest.raises(ParseError):
        parse(arith.GRAMMAR, arith.OPM, [Token("x", "x")])


def test_ids_are_deterministic_and_unique():
    a = arith.parse_expr("1+2*3+4")
    b = arith.parse_expr("1+2*3+4")
    assert [x.id for x in a.walk()] == [x.id for x in b.walk()]
    ids = [x.id for x in a.walk()]
    assert len(ids) == len(set(ids))
    assert a.next_id > max(ids)


def test_spans_and_leaves():
    tree = arith.parse_expr("1+2*3")
    spans = tree.spans()
    assert spans[tree.root.id] == (0, 5)
    assert [t.lexeme for t in tree.tokens] == ["1", "+", "2", "*", "3"]
    for node in tree.walk():
        start, end = spans[node.id]
        assert node.width == end - start


def test_local_parse_in_context():
    toks = arith.tokenize("2*3")
    leaves = [leaf(i, t) for i, t in enumerate(toks)]
    rest = shift_reduce(arith.GRAMMAR, arith.OPM, leaves, "+", "+")
    assert len(rest) == 1 and rest[0].symbol == "B"


def test_local_parse_needs_context():
    # "3+4" between "*" and "#" cannot be reduced without the "*" on its left
    toks = arith.tokenize("3+4")
    leaves = [leaf(i, t) for i, t in enumerate(toks)]
    with pytest.raises(NotLocal):
        shift_reduce(arith.GRAMMAR, arith.OPM, leaves, "*", SENTINEL)


def test_dump_preorder():
    tree = arith.parse_expr("1+2")
    dump = tree.dump()
    assert dump[0]["rule"] == "S ::= A" and dump[0]["depth"] == 0
    assert [d["lexeme"] for d in dump if "lexeme" in d] == ["1", "+", "2"]
    assert len(dump) == len(tree)
