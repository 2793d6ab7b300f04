"""Safety checking of Mini programs against a property automaton.

The synthesized attribute ``gamma`` of a statement is a finite set of
transition templates ``(src, dst, steps)``: from automaton location ``src``
the statement can move to ``dst`` while transforming the program
configuration by ``steps``.  ``ANY`` in both positions stands for the family
of identity moves ``s -> s`` over every location.  ``steps`` is the ordered
list of variable assignments and condition checks taken along the way; a
step list that cannot be satisfied by any initial valuation is the invalid
configuration and is pruned as soon as it appears.

Once ``ERR`` is reached the run is already a violation, so composition
passes ``ERR`` templates through unchanged instead of extending them.

Sets are kept canonical: templates whose step lists have the same effect on
a configuration are merged, keeping the shortest list as the witness.
Without this, every ``x := f()`` would double the set.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from . import mini
from .attributes import AttributeSchema, SchemaError, evaluate
from .mini import CondExpr, cond_evaluate, condition_variables
from .parser import SyntaxTree

ERR = "ERR"
ANY = "<any>"
DEFAULT_UNROLL = 3


class AutomatonError(ValueError):
    pass


class AlphabetError(ValueError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"function {symbol!r} is not in the automaton alphabet")


@dataclass(frozen=True)
class PropertyAutomaton:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    transitions: Mapping[tuple[str, str], str]
    initial: str

    def __post_init__(self):
        if ERR in self.states or ANY in self.states:
            raise AutomatonError(f"state names {ERR!r} and {ANY!r} are reserved")
        if self.initial not in self.states:
            raise AutomatonError(f"initial state {self.initial!r} is not a state")
        for (src, sym), dst in self.transitions.items():
            if src not in self.states or dst not in self.states:
                raise AutomatonError(f"transition {src} -{sym}-> {dst} uses an unknown state")
            if sym not in self.alphabet:
                raise AutomatonError(f"transition {src} -{sym}-> {dst} uses a symbol outside the alphabet")

    @classmethod
    def from_dict(cls, data: Mapping) -> "PropertyAutomaton":
        try:
            transitions = {}
            for t in data["transitions"]:
                key = (t["from"], t["on"])
                if key in transitions and transitions[key] != t["to"]:
                    raise AutomatonError(f"nondeterministic transitions on {key}")
                transitions[key] = t["to"]
            return cls(tuple(data["states"]), tuple(data["alphabet"]), transitions, data["initial"])
        except (KeyError, TypeError) as exc:
            raise AutomatonError(f"malformed automaton: missing or invalid {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "PropertyAutomaton":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise AutomatonError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def assignment_symbols(self) -> list[str]:
        return [s for s in self.alphabet if ":=" in s]


@dataclass(frozen=True)
class ImageAutomaton:
    states: tuple[str, ...]  # includes ERR
    alphabet: tuple[str, ...]
    delta: Mapping[tuple[str, str], str]  # total over non-ERR states x alphabet
    initial: str

    def step(self, state: str, symbol: str) -> str:
        if symbol not in self.alphabet:
            raise AlphabetError(symbol)
        return self.delta[(state, symbol)]


def image_automaton(a: PropertyAutomaton) -> ImageAutomaton:
    delta = dict(a.transitions)
    for s in a.states:
        for t in a.alphabet:
            delta.setdefault((s, t), ERR)
    return ImageAutomaton(a.states + (ERR,), a.alphabet, delta, a.initial)


# -- configuration transformers ---------------------------------------------------

@dataclass(frozen=True)
class Assign:
    var: str
    value: bool

    def __str__(self):
        return f"Assign({self.var},{str(self.value).lower()})"


@dataclass(frozen=True)
class Check:
    cond: CondExpr
    expected: bool

    def __str__(self):
        return f"Check({self.cond}, {str(self.expected).lower()})"


Steps = tuple  # tuple of Assign | Check


def _read_before_write(steps: Steps) -> list[str]:
    assigned: set[str] = set()
    inputs: list[str] = []
    for step in steps:
        if isinstance(step, Assign):
            assigned.add(step.var)
        else:
            for v in sorted(condition_variables(step.cond)):
                if v not in assigned and v not in inputs:
                    inputs.append(v)
    return inputs


def _replay(steps: Steps, initial: Mapping[str, bool]) -> bool:
    vm = dict(initial)
    for step in steps:
        if isinstance(step, Assign):
            vm[step.var] = step.value
        elif cond_evaluate(step.cond, vm) is (not step.expected):
            return False
    return True


@functools.lru_cache(maxsize=1 << 16)
def effect(steps: Steps) -> tuple:
    """What a step list does to a configuration, independent of how it is written.

    The triple holds the final value of every assigned variable, the
    variables read before being written, and the initial valuations of those
    variables that pass every check.  Step lists with the same effect are
    interchangeable in any composition.
    """
    final = {}
    for step in steps:
        if isinstance(step, Assign):
            final[step.var] = step.value
    inputs = tuple(sorted(_read_before_write(steps)))
    if not _replay(steps, {}):
        allowed = frozenset()
    else:
        allowed = frozenset(
            values for values in itertools.product((False, True), repeat=len(inputs))
            if _replay(steps, dict(zip(inputs, values)))
        )
    return tuple(sorted(final.items())), inputs, allowed


def is_live(steps: Steps) -> bool:
    """Whether some initial valuation of the variables read before being written satisfies every check.

    Checks that stay unknown (placeholders) never invalidate a step list.
    """
    return bool(effect(steps)[2])


def upd(c: Steps | None, var: str | None = None, varval: bool | None = None,
        expr: CondExpr | None = None, exprval: bool | None = None) -> Steps | None:
    """Extend a configuration transformer by one assignment or one check; ``None`` is ⊥."""
    if c is None:
        return None
    if (var is None) == (expr is None):
        raise ValueError("upd takes exactly one of an assignment or a check")
    step = Assign(var, varval) if var is not None else Check(expr, exprval)
    out = c + (step,)
    return out if is_live(out) else None


class Template(NamedTuple):
    src: str
    dst: str
    steps: Steps

    def __str__(self):
        steps = ", ".join(map(str, self.steps))
        return f"<{self.src}, {self.dst}, [{steps}]>"


TransitionSet = frozenset  # of Template

IDENTITY: TransitionSet = frozenset([Template(ANY, ANY, ())])


class Tally:
    """Counts transition templates materialized during synthesis (before pruning)."""

    def __init__(self):
        self.count = 0

    def add(self, n: int) -> None:
        self.count += n


def _join(t1: Template, t2: Template) -> Template | None:
    if t1.src == ANY:
        src, dst = t2.src, t2.dst
    else:
        if t2.src != ANY and t2.src != t1.dst:
            return None
        src = t1.src
        dst = t1.dst if t2.dst == ANY else t2.dst
    return Template(src, dst, t1.steps + t2.steps)


def _witness_order(t: Template):
    return len(t.steps), str(t)


def canonical(g: Iterable[Template]) -> TransitionSet:
    """Keep one template per (src, dst, effect), the one with the shortest step list.

    Templates that reached ``ERR`` are never extended, so their final
    assignments do not matter; they are merged by the inputs they accept.
    """
    best: dict[tuple, Template] = {}
    for t in g:
        key = (t.src, ERR, effect(t.steps)[1:]) if t.dst == ERR else (t.src, t.dst, effect(t.steps))
        cur = best.get(key)
        if cur is None or _witness_order(t) < _witness_order(cur):
            best[key] = t
    return frozenset(best.values())


def compose(g1: Iterable[Template], g2: Iterable[Template], tally: Tally | None = None,
            prune: bool = True) -> TransitionSet:
    """Relational composition ``g1 ∘ g2``: first a move of ``g1``, then one of ``g2``."""
    g2 = list(g2)
    by_src: dict[str, list[Template]] = {}
    for t in g2:
        by_src.setdefault(t.src, []).append(t)
    wildcard = by_src.get(ANY, [])
    out = set()
    made = 0
    for t1 in g1:
        if t1.dst == ERR:
            made += 1
            out.add(t1)
            continue
        partners = g2 if t1.src == ANY else by_src.get(t1.dst, []) + wildcard
        for t2 in partners:
            joined = _join(t1, t2)
            if joined is None:
                continue
            made += 1
            if not prune or is_live(joined.steps):
                out.add(joined)
    if tally is not None:
        tally.add(made)
    return canonical(out) if prune else frozenset(out)


def relation_iterate(g: Iterable[Template], k: int, tally: Tally | None = None) -> TransitionSet:
    """Union of the 0..k-fold compositions of ``g`` with itself."""
    if k < 0:
        raise ValueError("unroll count must be non-negative")
    g = frozenset(g)
    result = set(IDENTITY)
    power = IDENTITY
    for _ in range(k):
        power = compose(power, g, tally)
        result |= power
    return canonical(result)


def safety_schema(img: ImageAutomaton, unroll: int = DEFAULT_UNROLL,
                  tally: Tally | None = None) -> AttributeSchema:
    """Attribute schema computing ``gamma`` transition sets; ``tally`` counts templates."""
    tally = tally if tally is not None else Tally()

    def moves(f: str, steps: Steps = ()) -> list[Template]:
        return [Template(s, img.step(s, f), steps) for s in img.states if s != ERR]

    def copy(g):
        tally.add(len(g))
        return {"gamma": g}

    def program(k):
        return copy(k[1]["gamma"])

    def seq(k):
        return {"gamma": compose(k[0]["gamma"], k[2]["gamma"], tally)}

    def last(k):
        return copy(k[0]["gamma"])

    def call(k):
        return copy(frozenset(moves(k[0]["eta"])))

    def set_true(k):
        return copy(frozenset([Template(ANY, ANY, (Assign(k[0]["eta"], True),))]))

    def set_false(k):
        return copy(frozenset([Template(ANY, ANY, (Assign(k[0]["eta"], False),))]))

    def assign_call(k):
        v, f = k[0]["eta"], k[2]["eta"]
        return copy(frozenset(moves(f, (Assign(v, True),)) + moves(f, (Assign(v, False),))))

    def if_(k):
        g_true, g_false = k[1]["gamma"]
        return {"gamma": canonical(compose(g_true, k[3]["gamma"], tally) | compose(g_false, k[5]["gamma"], tally))}

    def while_(k):
        g_true, g_false = k[1]["gamma"]
        body = relation_iterate(compose(g_true, k[3]["gamma"], tally), unroll, tally)
        return {"gamma": compose(body, g_false, tally)}

    def cond(k):
        text = k[0].lexeme
        e = mini.parse_condition(text)
        g_true = frozenset([Template(ANY, ANY, (Check(e, True),))])
        g_false = frozenset([Template(ANY, ANY, (Check(e, False),))])
        tally.add(2)
        return {"gamma": (g_true, g_false), "nu": text}

    def ident(k):
        return {"eta": k[0].lexeme}

    schema = AttributeSchema(
        "safety",
        {
            "S": ["gamma"],
            "stmtlist": ["gamma"],
            "stmt": ["gamma"],
            "cond": ["gamma", "nu"],
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
    schema.tally = tally
    schema.check(mini.GRAMMAR)
    return schema


def grounded(gamma: Iterable[Template], initial: str) -> list[Template]:
    """Templates applicable from the initial location."""
    return sorted((t for t in gamma if t.src in (initial, ANY)), key=str)


@dataclass
class SafetyResult:
    safe: bool
    witness: Steps | None
    tuples_processed: int
    gamma: TransitionSet
    warnings: list[str] = field(default_factory=list)
    attributes: dict = field(default_factory=dict, repr=False)

    @property
    def verdict(self) -> str:
        return "safe" if self.safe else "unsafe"


def verdict_from(gamma: TransitionSet, initial: str) -> tuple[bool, Steps | None]:
    hits = [t for t in grounded(gamma, initial) if t.dst == ERR and is_live(t.steps)]
    if not hits:
        return True, None
    best = min(hits, key=lambda t: (len(t.steps), str(t)))
    return False, best.steps


def automaton_warnings(a: PropertyAutomaton) -> list[str]:
    va = a.assignment_symbols()
    if not va:
        return []
    return [f"assignment symbols {va} only take part in totalization; "
            "assignments from functions follow the function symbol"]


def verify_safety(tree: SyntaxTree, automaton: PropertyAutomaton,
                  unroll: int = DEFAULT_UNROLL) -> SafetyResult:
    img = image_automaton(automaton)
    schema = safety_schema(img, unroll)
    try:
        values = evaluate(tree, schema)
    except SchemaError as exc:
        raise (exc.cause if isinstance(exc.cause, AlphabetError) else exc) from exc
    return result_from(tree, automaton, values, schema.tally.count)


def result_from(tree: SyntaxTree, automaton: PropertyAutomaton, values, tuples: int) -> SafetyResult:
    gamma = values[tree.root.id]["gamma"]
    safe, witness = verdict_from(gamma, automaton.initial)
    return SafetyResult(safe, witness, tuples, gamma, automaton_warnings(automaton), values)


def format_steps(steps: Sequence) -> list[str]:
    return [str(s) for s in steps]
