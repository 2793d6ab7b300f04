from fractions import Fraction

import pytest

from incverify import mini
from incverify.attributes import evaluate
from incverify.probexpr import ProbExpr
from incverify.reliability import (
    DivergenceError,
    MissingProfileEntry,
    ProfileError,
    ReliabilityProfile,
    reliability_schema,
    verify_reliability,
    while_reliability,
)

PROFILE = ReliabilityProfile.from_dict({"succ": {"opA": 0.97, "opB": 0.99}, "placeholder": 0.5})


def attrs_by_number(source, profile=PROFILE):
    tree = mini.parse_program(source)
    values = evaluate(tree, reliability_schema(profile))
    numbers = mini.node_numbering(tree)
    return {numbers[k]: v for k, v in values.items() if k in numbers}


def test_v1_intermediate_attributes(v1_source):
    a = attrs_by_number(v1_source)
    x = ProbExpr.atom("x")
    assert a[2]["gamma"] == Fraction(97, 100)
    assert a[6]["gamma"] == 1 and a[6]["theta"] == (("x", Fraction(1)),)
    assert a[12]["delta"] == x
    assert a[11]["gamma"] == Fraction(99, 100) * x + Fraction(97, 100) * (1 - x)
    assert a[10]["gamma"] == a[11]["gamma"]
    assert a[5]["gamma"] == Fraction(99, 100)
    assert a[1]["gamma"] == a[0]["gamma"] == Fraction(9603, 10000)


def test_v2_value(v2_source):
    assert verify_reliability(mini.parse_program(v2_source), PROFILE).exact == Fraction(9409, 10000)


def test_symbolic_result_when_variable_unknown():
    tree = mini.parse_program("begin if x==true then opA(); else opB(); endif; end")
    res = verify_reliability(tree, PROFILE)
    assert res.exact is None
    assert res.value.atoms() == {"x"}
    assert any("unresolved" in w for w in res.warnings)


def test_placeholder_symbolic_without_profile_value():
    profile = ReliabilityProfile.from_dict({"succ": {"opA": 1, "opB": 0}})
    tree = mini.parse_program("begin if * then opA(); else opB(); endif; end")
    res = verify_reliability(tree, profile)
    assert res.value == ProbExpr.atom("*")


def test_assignment_from_function():
    profile = ReliabilityProfile.from_dict({"succ": {"f": 0.5, "g": 0.5}, "ret_true": {"f": 0.25}})
    tree = mini.parse_program("begin x := f(); if x==true then g(); else x := true; endif; end")
    res = verify_reliability(tree, profile)
    assert res.exact == Fraction(1, 4) * Fraction(1, 2) + Fraction(3, 4)
    assert any("treated as 1" in w for w in res.warnings)


def test_shared_conjunct_warning():
    profile = ReliabilityProfile.from_dict({"succ": {"f": 1}})
    tree = mini.parse_program("begin x := true; if x==true && x==true then f(); else f(); endif; end")
    assert any("independent" in w for w in verify_reliability(tree, profile).warnings)


def test_missing_profile_entry():
    tree = mini.parse_program("begin nope(); end")
    with pytest.raises(MissingProfileEntry) as info:
        verify_reliability(tree, PROFILE)
    assert info.value.function == "nope"


def test_profile_validation():
    with pytest.raises(ProfileError):
        ReliabilityProfile.from_dict({"succ": {"f": 1.5}})
    with pytest.raises(ProfileError):
        ReliabilityProfile.from_dict({"succ": {"f": 0.5}, "placeholder": -1})


def test_while_formula():
    assert while_reliability(Fraction(1, 2), Fraction(4, 5)) == Fraction(5, 6)
    assert while_reliability(0, Fraction(1, 3)) == 1
    with pytest.raises(DivergenceError):
        while_reliability(1, Fraction(1, 2))


def test_diverging_loop_reports_location():
    tree = mini.parse_program("begin x := true; while x==true do f(); endwhile; end")
    profile = ReliabilityProfile.from_dict({"succ": {"f": 0.5}})
    # the loop condition is only known to be certain after refinement, so no error here
    assert verify_reliability(tree, profile).exact == 0
    tree = mini.parse_program("begin while !* do f(); endwhile; end")
    with pytest.raises(DivergenceError, match="loop at tokens"):
        verify_reliability(tree, ReliabilityProfile.from_dict({"succ": {"f": 0.5}, "placeholder": 0}))


def test_profile_load(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"succ": {"opA": 0.97}}')
    assert ReliabilityProfile.load(p).succ["opA"] == Fraction(97, 100)
    p.write_text("[1]")
    with pytest.raises(ProfileError):
        ReliabilityProfile.load(p)
    p.write_text("{")
    with pytest.raises(ProfileError):
        ReliabilityProfile.load(p)
