import random

import pytest

from incverify import arith, mini
from incverify.attributes import AttributeSchema, SchemaError, collect, evaluate, reevaluate
from incverify.incremental import Edit, apply_edit, diff_to_edit
from incverify.reliability import ReliabilityProfile, reliability_schema
from incverify.safety import PropertyAutomaton, image_automaton, safety_schema

from oracles import compare_attributes, compare_with_scratch, random_mini_edit, random_program, render

PROFILE = ReliabilityProfile.from_dict(
    {"succ": {"opA": 0.9, "opB": 0.8, "opC": 0.7},
     "ret_true": {"opA": 0.5, "opB": 0.25, "opC": 0.125}, "placeholder": 0.5})
AUTOMATON = image_automaton(PropertyAutomaton.from_dict({
    "states": ["q0", "q1"], "initial": "q0", "alphabet": ["opA", "opB", "opC"],
    "transitions": [{"from": "q0", "on": "opA", "to": "q1"}, {"from": "q1", "on": "opB", "to": "q0"},
                    {"from": "q0", "on": "opC", "to": "q0"}, {"from": "q1", "on": "opC", "to": "q1"}]}))


def test_value_schema_walkthrough():
    tree = arith.parse_expr("5*4+2+6*7*8")
    values = evaluate(tree, arith.VALUE_SCHEMA)
    assert values[tree.root.id]["value"] == 358
    assert collect(tree, arith.VALUE_SCHEMA) == values


def test_missing_rule_function():
    schema = AttributeSchema("partial", {"S": ["value"]}, {"S ::= A": lambda k: {"value": 0}})
    with pytest.raises(SchemaError):
        schema.check(arith.GRAMMAR)
    with pytest.raises(SchemaError) as info:
        evaluate(arith.parse_expr("1+2"), schema)
    assert info.value.node_id is not None


def test_failing_function_is_wrapped():
    def boom(kids):
        raise RuntimeError("nope")

    fns = dict(arith.VALUE_SCHEMA.functions)
    fns["B ::= n"] = boom
    schema = AttributeSchema("boom", arith.VALUE_SCHEMA.attributes, fns)
    with pytest.raises(SchemaError) as info:
        evaluate(arith.parse_expr("1"), schema)
    assert isinstance(info.value.cause, RuntimeError)


def test_arith_reevaluation_recomputes_only_the_spine():
    old = arith.parse_expr("5*4+2+6*7*8")
    schema = AttributeSchema("value", arith.VALUE_SCHEMA.attributes, arith.VALUE_SCHEMA.functions)
    old_values = evaluate(old, schema)
    new, reuse = apply_edit(old, Edit(6, 8), arith.GRAMMAR, arith.OPM)
    values, stats = reevaluate(new, schema, reuse.spliced, old_values, reuse.replaced)
    assert values[new.root.id]["value"] == 78
    assert len(stats.recomputed) < len(values)


def test_v1_to_v2_reliability_spine(v1_source, v2_source):
    old = mini.parse_program(v1_source)
    schema = reliability_schema(ReliabilityProfile.from_dict({"succ": {"opA": 0.97, "opB": 0.99}}))
    old_values = evaluate(old, schema)
    new, reuse = apply_edit(old, diff_to_edit(old.tokens, mini.tokenize(v2_source)), mini.GRAMMAR, mini.OPM)
    values, stats = reevaluate(new, schema, reuse.spliced, old_values, reuse.replaced)
    numbers = mini.node_numbering(new)
    assert [numbers[i] for i in stats.recomputed] == [6, 5, 1, 0]
    assert stats.cutoff_at is None


def test_cutoff_stops_at_unchanged_value():
    # swapping one call for another with the same success probability
    profile = ReliabilityProfile.from_dict({"succ": {"f": 0.5, "g": 0.5, "h": 0.25}})
    src = "begin h(); if * then f(); else h(); endif; h(); end"
    old = mini.parse_program(src)
    schema = reliability_schema(profile)
    old_values = evaluate(old, schema)
    k = next(i for i, t in enumerate(old.tokens) if t.lexeme == "f")
    new, reuse = apply_edit(old, Edit(k, k + 1, (mini.tokenize("g()")[0],)), mini.GRAMMAR, mini.OPM)
    values, stats = reevaluate(new, schema, reuse.spliced, old_values, reuse.replaced)
    assert stats.cutoff_at is not None
    assert values[new.root.id] == old_values[old.root.id]


def test_identical_inputs_recompute_nothing(v1_source):
    old = mini.parse_program(v1_source)
    schema = reliability_schema(ReliabilityProfile.from_dict({"succ": {"opA": 0.97, "opB": 0.99}}))
    old_values = evaluate(old, schema)
    values, stats = reevaluate(old, schema, None, old_values)
    assert stats.recomputed == [] and values == old_values


@pytest.mark.parametrize("seed", range(4))
def test_reevaluate_matches_evaluate(seed):
    rng = random.Random(100 + seed)
    for _ in range(25):
        tree = mini.parse_program(render(random_program(rng, rng.randint(1, 12))))
        edit, _ = random_mini_edit(rng, tree)
        new, reuse = compare_with_scratch(tree, edit, mini.GRAMMAR, mini.OPM)
        if new is None:
            continue
        compare_attributes(tree, new, reuse, lambda: reliability_schema(PROFILE), mini.GRAMMAR, mini.OPM)
        compare_attributes(tree, new, reuse, lambda: safety_schema(AUTOMATON), mini.GRAMMAR, mini.OPM)
