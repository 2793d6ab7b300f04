"""Exact rational functions over named probability atoms.

An expression is a ratio of two polynomials with :class:`~fractions.Fraction`
coefficients.  Equality is decided by cross-multiplication, so two
expressions compare equal exactly when they denote the same rational
function, regardless of how they were built.  Constant expressions collapse
to a single fraction.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Union

Monomial = tuple  # sorted tuple of (atom, exponent)
Poly = dict  # Monomial -> Fraction (no zero coefficients)

Number = Union[int, Fraction, Decimal]

_ONE: Monomial = ()


def _poly_const(c: Fraction) -> Poly:
    return {_ONE: c} if c else {}


def _poly_add(p: Poly, q: Poly, sign: int = 1) -> Poly:
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for atom, e in b:
        exps[atom] = exps.get(atom, 0) + e
    return tuple(sorted(exps.items()))


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = _mono_mul(ma, mb)
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _poly_scale(p: Poly, c: Fraction) -> Poly:
    return {m: v * c for m, v in p.items()} if c else {}


def _poly_const_value(p: Poly) -> Fraction | None:
    if not p:
        return Fraction(0)
    if len(p) == 1 and _ONE in p:
        return p[_ONE]
    return None


def _poly_subs(p: Poly, values: Mapping[str, Fraction]) -> Poly:
    out: Poly = {}
    for m, c in p.items():
        coeff = c
        rest = []
        for atom, e in m:
            if atom in values:
                coeff *= values[atom] ** e
            else:
                rest.append((atom, e))
        if coeff:
            key = tuple(rest)
            v = out.get(key, 0) + coeff
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


def _leading(p: Poly) -> Fraction:
    return p[max(p)]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Decimal)):
        return Fraction(x)
    if isinstance(x, float):
        # floats go through their shortest repr so 0.97 means 97/100
        return Fraction(Decimal(repr(x)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a number: {x!r}")


# fixed evaluation point for hashing: equal rational functions agree here
_HASH_POINT_CACHE: dict[str, Fraction] = {}


def _hash_point(atom: str) -> Fraction:
    v = _HASH_POINT_CACHE.get(atom)
    if v is None:
        h = sum((i + 1) * ord(ch) for i, ch in enumerate(atom))
        v = _HASH_POINT_CACHE[atom] = Fraction(1000003 + h % 7919, 1000033 + 2 * (h % 104729))
    return v


class ProbExpr:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        den = den if den is not None else {_ONE: Fraction(1)}
        if not den:
            raise ZeroDivisionError("probability expression with zero denominator")
        c = _poly_const_value(den)
        if not num:
            num, den = {}, {_ONE: Fraction(1)}
        elif c is not None:
            num, den = _poly_scale(num, 1 / c), {_ONE: Fraction(1)}
        else:
            lead = _leading(den)
            if lead != 1:
                num, den = _poly_scale(num, 1 / lead), _poly_scale(den, 1 / lead)
            # cancel when the numerator is a constant multiple of the denominator
            if num:
                ratio = _leading(num) / _leading(den)
                if _poly_add(num, _poly_scale(den, ratio), -1) == {}:
                    num, den = _poly_const(ratio), {_ONE: Fraction(1)}
        self.num = num
        self.den = den

    @classmethod
    def const(cls, value: Number | float | str) -> "ProbExpr":
        return cls(_poly_const(to_fraction(value)))

    @classmethod
    def atom(cls, name: str) -> "ProbExpr":
        return cls({((name, 1),): Fraction(1)})

    @staticmethod
    def lift(x) -> "ProbExpr":
        return x if isinstance(x, ProbExpr) else ProbExpr.const(x)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = ProbExpr.lift(other)
        if self.den == o.den:
            return ProbExpr(_poly_add(self.num, o.num), self.den)
        return ProbExpr(
            _poly_add(_poly_mul(self.num, o.den), _poly_mul(o.num, self.den)),
            _poly_mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return ProbExpr(_poly_scale(self.num, Fraction(-1)), self.den)

    def __sub__(self, other):
        return self + (-ProbExpr.lift(other))

    def __rsub__(self, other):
        return ProbExpr.lift(other) - self

    def __mul__(self, other):
        o = ProbExpr.lift(other)
        return ProbExpr(_poly_mul(self.num, o.num), _poly_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ProbExpr.lift(other)
        if not o.num:
            raise ZeroDivisionError("division by a zero probability expression")
        return ProbExpr(_poly_mul(self.num, o.den), _poly_mul(self.den, o.num))

    def __rtruediv__(self, other):
        return ProbExpr.lift(other) / self

    # -- queries ------------------------------------------------------------

    def atoms(self) -> frozenset[str]:
        return frozenset(a for p in (self.num, self.den) for m in p for a, _ in m)

    @property
    def is_constant(self) -> bool:
        return not self.atoms()

    def value(self) -> Fraction:
        """The exact value of a constant expression."""
        c = _poly_const_value(self.num)
        if c is None or not self.is_constant:
            raise ValueError(f"expression {self} still depends on {sorted(self.atoms())}")
        return c

    def subs(self, values: Mapping[str, Number | float]) -> "ProbExpr":
        vals = {k: to_fraction(v) for k, v in values.items()}
        if not vals or not (self.atoms() & vals.keys()):
            return self
        return ProbExpr(_poly_subs(self.num, vals), _poly_subs(self.den, vals))

    def evaluate(self, values: Mapping[str, Number | float]) -> Fraction:
        return self.subs(values).value()

    def __float__(self):
        return float(self.value())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Decimal, float)):
            other = ProbExpr.const(other)
        if not isinstance(other, ProbExpr):
            return NotImplemented
        return _poly_mul(self.num, other.den) == _poly_mul(other.num, self.den)

    def __hash__(self):
        if self.is_constant:
            return hash(self.value())
        point = {a: _hash_point(a) for a in self.atoms()}
        try:
            return hash(self.evaluate(point))
        except ZeroDivisionError:
            return 0

    def __repr__(self):
        return f"ProbExpr({self})"

    def __str__(self):
        num = _poly_str(self.num)
        if _poly_const_value(self.den) == 1:
            return num
        return f"({num}) / ({_poly_str(self.den)})"


def _poly_str(p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for m in sorted(p, key=lambda m: (len(m), m)):
        c = p[m]
        factors = [f"Pr_T({a})" + (f"^{e}" if e != 1 else "") for a, e in m]
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("·".join(factors))
        else:
            parts.append("·".join([str(c)] + factors))
    return " + ".join(parts).replace("+ -", "- ")


def product(xs: Iterable) -> ProbExpr:
    out = ProbExpr.const(1)
    for x in xs:
        out = out * x
    return out
