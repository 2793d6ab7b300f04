import pytest

from incverify import arith, mini
from incverify.grammar import (
    SENTINEL,
    Grammar,
    GrammarError,
    PrecedenceConflictError,
    Relation,
    compute_opm,
    terminal_border_sets,
    validate_fnf,
    validate_operator_form,
)

Y, E, T = Relation.YIELDS, Relation.EQUAL, Relation.TAKES


def test_arith_matrix_core_entries():
    assert arith.OPM.core_entries() == {
        ("n", "+"): T, ("n", "*"): T,
        ("+", "n"): Y, ("+", "+"): T, ("+", "*"): Y,
        ("*", "n"): E,
    }


def test_border_sets_arith():
    b = terminal_border_sets(arith.GRAMMAR)
    assert b["B"] == (frozenset({"n", "*"}), frozenset({"n"}))
    assert b["A"] == (frozenset({"n", "*", "+"}), frozenset({"n", "+"}))
    assert b["S"] == b["A"]


def test_sentinel_relations():
    for t in arith.GRAMMAR.terminals:
        assert arith.OPM.get(SENTINEL, t) is Y
        assert arith.OPM.get(t, SENTINEL) is T


def test_adjacent_nonterminals_detected():
    g = Grammar.from_rules("S", [("S", ["A", "B"]), ("A", ["a"]), ("B", ["b"])], terminals=["a", "b"])
    v = validate_operator_form(g)
    assert len(v) == 1 and v[0].kind == "adjacent-nonterminals" and v[0].position == 0
    with pytest.raises(GrammarError):
        compute_opm(g)


def test_conflict_reported():
    # a + a + a with no associativity: + both yields and takes +
    g = Grammar.from_rules("S", [("S", ["E"]), ("E", ["E", "+", "E"]), ("E", ["a"])], terminals=["a", "+"])
    with pytest.raises(PrecedenceConflictError) as info:
        compute_opm(g)
    cells = {c.cell for c in info.value.conflicts}
    assert ("+", "+") in cells


def test_fnf_violations():
    g = Grammar.from_rules(
        "S",
        [("S", ["A"]), ("A", ["a", "S"]), ("A", ["B"]), ("B", ["a", "S"])],
        terminals=["a"],
    )
    kinds = {v.kind for v in validate_fnf(g)}
    assert kinds == {"not-invertible", "axiom-in-rhs", "renaming"}


def test_empty_rule_only_for_axiom():
    with pytest.raises(GrammarError):
        Grammar.from_rules("S", [("S", ["a", "B"]), ("B", [])], terminals=["a"])


def test_mini_grammar_is_well_formed():
    assert validate_operator_form(mini.GRAMMAR) == []
    assert validate_fnf(mini.GRAMMAR) == []
    assert mini.OPM.get(";", ";") is Y
    assert mini.OPM.get(";", "end") is T
    assert mini.OPM.get("begin", "end") is E
    assert mini.OPM.get("if", "then") is E


def test_table_renders_every_terminal():
    text = arith.OPM.table()
    assert len(text.splitlines()) == len(arith.GRAMMAR.terminals) + 2
