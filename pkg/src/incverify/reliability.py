"""Reliability of Mini programs as synthesized attributes.

Attributes: ``gamma`` (probability of successful completion of the subtree,
possibly symbolic in the truth probabilities of variables), ``theta`` (the
knowledge an assignment establishes, as sorted ``(variable, probability)``
pairs), ``delta`` (truth probability of a condition) and ``eta`` (identifier
text).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from . import mini
from .attributes import AttributeSchema, SchemaError, evaluate
from .parser import SyntaxTree
from .probexpr import ProbExpr, to_fraction

PLACEHOLDER_ATOM = "*"
EMPTY: tuple = ()


class ProfileError(ValueError):
    pass


class MissingProfileEntry(ProfileError):
    def __init__(self, function: str, table: str):
        self.function = function
        self.table = table
        super().__init__(f"profile has no {table} entry for function {function!r}")


class DivergenceError(ArithmeticError):
    """A loop whose condition is certainly true never exits."""


@dataclass(frozen=True)
class ReliabilityProfile:
    succ: Mapping[str, Fraction]
    ret_true: Mapping[str, Fraction] = field(default_factory=dict)
    placeholder: Fraction | None = None

    def __post_init__(self):
        for table, values in (("succ", self.succ), ("ret_true", self.ret_true)):
            for name, p in values.items():
                if not 0 <= p <= 1:
                    raise ProfileError(f"{table}[{name!r}] = {p} is outside [0, 1]")
        if self.placeholder is not None and not 0 <= self.placeholder <= 1:
            raise ProfileError(f"placeholder = {self.placeholder} is outside [0, 1]")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReliabilityProfile":
        try:
            succ = {k: to_fraction(v) for k, v in data.get("succ", {}).items()}
            ret = {k: to_fraction(v) for k, v in data.get("ret_true", {}).items()}
            ph = data.get("placeholder")
            return cls(succ, ret, None if ph is None else to_fraction(ph))
        except (TypeError, AttributeError) as exc:
            raise ProfileError(f"malformed profile: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ReliabilityProfile":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"), parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ProfileError(f"{path}: profile must be a JSON object")
        return cls.from_dict(data)


def knowledge(pairs: Mapping[str, Fraction]) -> tuple:
    """Canonical knowledge value: at most one pair per variable, sorted."""
    return tuple(sorted(pairs.items()))


def refine(g: ProbExpr, k) -> ProbExpr:
    """Substitute the variable probabilities known in ``k`` into ``g``."""
    if not k:
        return g
    return g.subs(dict(k))


def while_reliability(d, body) -> ProbExpr:
    """Expected reliability of a loop with continuation probability ``d``."""
    d = ProbExpr.lift(d)
    body = ProbExpr.lift(body)
    if d.is_constant and d.value() == 1:
        raise DivergenceError("loop condition holds with probability 1; the loop never exits")
    return (1 - d) / (1 - d * body)


def _atom(var: str) -> ProbExpr:
    return ProbExpr.atom(var)


def reliability_schema(profile: ReliabilityProfile) -> AttributeSchema:
    placeholder = (ProbExpr.atom(PLACEHOLDER_ATOM) if profile.placeholder is None
                   else ProbExpr.const(profile.placeholder))

    def succ(name):
        if name not in profile.succ:
            raise MissingProfileEntry(name, "succ")
        return ProbExpr.const(profile.succ[name])

    def ret_true(name):
        if name not in profile.ret_true:
            raise MissingProfileEntry(name, "ret_true")
        return profile.ret_true[name]

    def program(k):
        return {"gamma": k[1]["gamma"], "theta": EMPTY}

    def seq(k):
        stmt, rest = k[0], k[2]
        return {"gamma": refine(stmt["gamma"] * rest["gamma"], stmt["theta"]), "theta": EMPTY}

    def last(k):
        return {"gamma": k[0]["gamma"], "theta": EMPTY}

    def call(k):
        return {"gamma": succ(k[0]["eta"]), "theta": EMPTY}

    def set_true(k):
        return {"gamma": ProbExpr.const(1), "theta": knowledge({k[0]["eta"]: Fraction(1)})}

    def set_false(k):
        return {"gamma": ProbExpr.const(1), "theta": knowledge({k[0]["eta"]: Fraction(0)})}

    def assign_call(k):
        return {"gamma": ProbExpr.const(1), "theta": knowledge({k[0]["eta"]: ret_true(k[2]["eta"])})}

    def if_(k):
        d = k[1]["delta"]
        return {"gamma": k[3]["gamma"] * d + k[5]["gamma"] * (1 - d), "theta": EMPTY}

    def while_(k):
        return {"gamma": while_reliability(k[1]["delta"], k[3]["gamma"]), "theta": EMPTY}

    def cond(k):
        e = mini.parse_condition(k[0].lexeme)
        return {"delta": ProbExpr.lift(mini.cond_truth_probability(e, _atom, placeholder))}

    def ident(k):
        return {"eta": k[0].lexeme}

    schema = AttributeSchema(
        "reliability",
        {
            "S": ["gamma", "theta"],
            "stmtlist": ["gamma", "theta"],
            "stmt": ["gamma", "theta"],
            "cond": ["delta"],
            "var-id": ["eta"],
            "function-id": ["eta"],
        },
        {
            mini.R_PROGRAM: program,
            mini.R_SEQ: seq,
            mini.R_LAST: last,
            mini.R_CALL: call,
            mini.R_SET_TRUE: set_true,
            mini.R_SET_FALSE: set_false,
            mini.R_ASSIGN_CALL: assign_call,
            mini.R_IF: if_,
            mini.R_WHILE: while_,
            mini.R_COND: cond,
            mini.R_VAR: ident,
            mini.R_FUNC: ident,
        },
    )
    schema.check(mini.GRAMMAR)
    return schema


@dataclass
class ReliabilityResult:
    value: ProbExpr
    warnings: list[str]
    attributes: dict

    @property
    def exact(self) -> Fraction | None:
        return self.value.value() if self.value.is_constant else None


def diagnostics(tree: SyntaxTree, profile: ReliabilityProfile) -> list[str]:
    """Warnings about modelling assumptions the program leans on."""
    out = []
    for node in tree.walk():
        if node.is_leaf:
            continue
        rule = node.rule.id
        if rule == mini.R_ASSIGN_CALL:
            f = node.children[2].children[0].token.lexeme
            if profile.succ.get(f, 1) != 1:
                out.append(f"function {f!r} is used in an assignment; its success probability "
                           f"{profile.succ[f]} is treated as 1")
        elif rule == mini.R_COND:
            text = node.children[0].token.lexeme
            e = mini.parse_condition(text)
            shared = mini.shared_conjunct_variables(e)
            if shared:
                out.append(f"condition {text!r} conjoins terms over the same variables "
                           f"{sorted(shared)}; probabilities are multiplied as if independent")
    return out


def verify_reliability(tree: SyntaxTree, profile: ReliabilityProfile,
                       schema: AttributeSchema | None = None) -> ReliabilityResult:
    schema = schema or reliability_schema(profile)
    try:
        values = evaluate(tree, schema)
    except SchemaError as exc:
        raise unwrap_error(exc, tree) from exc
    return result_from(tree, profile, values)


def result_from(tree: SyntaxTree, profile: ReliabilityProfile, values) -> ReliabilityResult:
    gamma = values[tree.root.id]["gamma"]
    warnings = diagnostics(tree, profile)
    unresolved = sorted(gamma.atoms())
    if unresolved:
        names = ", ".join("*" if a == PLACEHOLDER_ATOM else a for a in unresolved)
        warnings.append(f"result depends on unresolved truth probabilities of: {names}")
    return ReliabilityResult(gamma, warnings, values)


def unwrap_error(exc: SchemaError, tree: SyntaxTree) -> Exception:
    cause = exc.cause
    if isinstance(cause, DivergenceError) and exc.node_id is not None:
        span = tree.spans().get(exc.node_id)
        toks = tree.tokens
        pos = toks[span[0]].pos if span else None
        return DivergenceError(f"{cause} (loop at tokens {span}, source offset {pos})")
    if isinstance(cause, (MissingProfileEntry, DivergenceError)):
        return cause
    return exc
