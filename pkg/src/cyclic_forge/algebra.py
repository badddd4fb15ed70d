"""Exact angle arithmetic.

An angle value is an :class:`AngleExpr`: a sparse vector of rational
coefficients over named unknown angles plus one reserved coordinate for pi.
Everything here is exact; floats only appear in :meth:`AngleExpr.evaluate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "AngleExpr",
    "LinearRelation",
    "expr_combine",
    "relation_from_equality",
    "in_span",
    "rank",
]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not allowed in exact angle arithmetic")
    return Fraction(value)


@dataclass(frozen=True)
class AngleExpr:
    """Rational combination of named angles plus a multiple of pi.

    ``coeffs`` is stored as a sorted tuple of ``(name, coefficient)`` with no
    zero entries, so structural equality is value equality.
    """

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    pi: Fraction = Fraction(0)

    def __post_init__(self):
        cleaned = {}
        for name, c in self.coeffs:
            if name == "pi":
                raise ValueError("'pi' is reserved and cannot name an angle")
            cleaned[name] = cleaned.get(name, Fraction(0)) + _frac(c)
        items = tuple(sorted((k, v) for k, v in cleaned.items() if v != 0))
        object.__setattr__(self, "coeffs", items)
        object.__setattr__(self, "pi", _frac(self.pi))

    # -- constructors -------------------------------------------------
    @classmethod
    def from_mapping(cls, coeffs: Mapping[str, object], pi=0) -> "AngleExpr":
        return cls(tuple(coeffs.items()), _frac(pi))

    @classmethod
    def var(cls, name: str, coeff=1) -> "AngleExpr":
        return cls(((name, _frac(coeff)),))

    @classmethod
    def const(cls, pi) -> "AngleExpr":
        """``pi`` times the given rational."""
        return cls((), _frac(pi))

    @classmethod
    def zero(cls) -> "AngleExpr":
        return cls()

    # -- access -------------------------------------------------------
    def __getitem__(self, name: str) -> Fraction:
        if name == "pi":
            return self.pi
        for k, v in self.coeffs:
            if k == name:
                return v
        return Fraction(0)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.coeffs)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs and self.pi == 0

    def is_constant(self) -> bool:
        return not self.coeffs

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "AngleExpr") -> "AngleExpr":
        return expr_combine(self, 1, other, 1)

    def __sub__(self, other: "AngleExpr") -> "AngleExpr":
        return expr_combine(self, 1, other, -1)

    def __neg__(self) -> "AngleExpr":
        return self.scale(-1)

    def scale(self, c) -> "AngleExpr":
        c = _frac(c)
        return AngleExpr(tuple((k, v * c) for k, v in self.coeffs), self.pi * c)

    def __mul__(self, c) -> "AngleExpr":
        return self.scale(c)

    __rmul__ = __mul__

    def substitute(self, name: str, value: "AngleExpr") -> "AngleExpr":
        c = self[name]
        if c == 0:
            return self
        rest = AngleExpr(tuple((k, v) for k, v in self.coeffs if k != name), self.pi)
        return expr_combine(rest, 1, value, c)

    def evaluate(self, values: Mapping[str, float]) -> float:
        """Numeric value in radians, given radian values for every name."""
        return float(self.pi) * math.pi + sum(float(c) * values[k] for k, c in self.coeffs)

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        return {
            "coeffs": {k: [v.numerator, v.denominator] for k, v in self.coeffs},
            "pi": [self.pi.numerator, self.pi.denominator],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AngleExpr":
        coeffs = {k: Fraction(n, d) for k, (n, d) in data["coeffs"].items()}
        n, d = data["pi"]
        return cls.from_mapping(coeffs, Fraction(n, d))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self.coeffs)
        return f"AngleExpr({{{inner}}} | pi: {self.pi})"


def expr_combine(a: AngleExpr, ca, b: AngleExpr, cb) -> AngleExpr:
    """Return ``ca*a + cb*b`` in canonical sparse form."""
    ca, cb = _frac(ca), _frac(cb)
    out: dict[str, Fraction] = {}
    for k, v in a.coeffs:
        out[k] = out.get(k, Fraction(0)) + ca * v
    for k, v in b.coeffs:
        out[k] = out.get(k, Fraction(0)) + cb * v
    return AngleExpr(tuple(out.items()), ca * a.pi + cb * b.pi)


@dataclass(frozen=True)
class LinearRelation:
    """The statement ``expr = 0``, kept in normalized form.

    Normalization scales the angle coefficients to coprime integers and makes
    the first one (by name) positive; the pi coefficient follows the same
    scaling and may stay fractional.
    """

    expr: AngleExpr = field(default_factory=AngleExpr)

    @classmethod
    def normalized(cls, expr: AngleExpr) -> "LinearRelation":
        if expr.is_zero():
            raise ValueError("the zero expression is not a relation")
        if expr.coeffs:
            coeffs = [v for _, v in expr.coeffs]
            denom_lcm = math.lcm(*(v.denominator for v in coeffs))
            ints = [int(v * denom_lcm) for v in coeffs]
            g = math.gcd(*ints)
            factor = Fraction(denom_lcm, g)
            if coeffs[0] < 0:
                factor = -factor
        else:
            factor = 1 / abs(expr.pi)
        return cls(expr.scale(factor))

    def __str__(self) -> str:
        return f"{format_expr(self.expr)} = 0"


def relation_from_equality(a: AngleExpr, b: AngleExpr) -> LinearRelation | None:
    """Normalized relation ``a - b = 0``; ``None`` when ``a`` and ``b`` coincide."""
    diff = a - b
    if diff.is_zero():
        return None
    return LinearRelation.normalized(diff)


# -- exact elimination ----------------------------------------------------

def _rows(exprs: Iterable[AngleExpr], names: Sequence[str]) -> list[list[Fraction]]:
    return [[e[n] for n in names] + [e.pi] for e in exprs]


def _row_reduce(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Reduced echelon rows (nonzero only), fraction-exact."""
    rows = [r[:] for r in rows]
    pivots: list[list[Fraction]] = []
    if not rows:
        return pivots
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return rows[:r]


def rank(exprs: Sequence[AngleExpr]) -> int:
    """Rank of the expressions viewed as vectors over (names..., pi)."""
    names = sorted({n for e in exprs for n in e.names})
    return len(_row_reduce(_rows(exprs, names)))


def in_span(candidate: AngleExpr, basis: Sequence[AngleExpr]) -> bool:
    """True iff ``candidate`` is a rational combination of ``basis`` and pi."""
    names = sorted({n for e in (candidate, *basis) for n in e.names})
    stacked = list(basis) + [AngleExpr.const(1)]
    before = len(_row_reduce(_rows(stacked, names)))
    after = len(_row_reduce(_rows(stacked + [candidate], names)))
    return before == after


# -- formatting -------------------------------------------------------------

def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_expr(expr: AngleExpr, order: Sequence[str] | None = None, degrees: bool = False,
                rename: Mapping[str, str] | None = None) -> str:
    """Human form such as ``x+w-y+90``.

    Positive variable terms come first, then negative ones, then the
    constant; a positive constant leads when every variable term is negative.
    """
    rename = rename or {}
    names = list(expr.names)
    if order is not None:
        rank_of = {n: i for i, n in enumerate(order)}
        names.sort(key=lambda n: (rank_of.get(n, len(rank_of)), n))
    pos = [n for n in names if expr[n] > 0]
    neg = [n for n in names if expr[n] < 0]

    def term(name: str, first: bool) -> str:
        c = expr[name]
        mag = abs(c)
        body = rename.get(name, name)
        body = body if mag == 1 else f"{_fmt_coeff(mag)}{body}"
        if first:
            return body if c > 0 else f"-{body}"
        return f"+{body}" if c > 0 else f"-{body}"

    def const(first: bool) -> str:
        c = expr.pi
        if degrees:
            v = c * 180
            body = _fmt_coeff(abs(v))
        else:
            mag = abs(c)
            body = "pi" if mag == 1 else f"{_fmt_coeff(mag)}pi"
        if first:
            return body if c > 0 else f"-{body}"
        return f"+{body}" if c > 0 else f"-{body}"

    parts: list[str] = []
    lead_const = expr.pi > 0 and not pos
    if lead_const:
        parts.append(const(True))
    for n in pos + neg:
        parts.append(term(n, not parts))
    if expr.pi != 0 and not lead_const:
        parts.append(const(not parts))
    return "".join(parts) if parts else "0"


def format_equation(expr: AngleExpr, order: Sequence[str] | None = None, degrees: bool = False,
                    rename: Mapping[str, str] | None = None) -> str:
    """Render ``expr = 0`` with positive terms on the left, e.g. ``x+90=y+z``."""
    lhs = AngleExpr(tuple((k, v) for k, v in expr.coeffs if v > 0), max(expr.pi, Fraction(0)))
    rhs = AngleExpr(tuple((k, -v) for k, v in expr.coeffs if v < 0), max(-expr.pi, Fraction(0)))
    return (f"{format_expr(lhs, order, degrees, rename)}="
            f"{format_expr(rhs, order, degrees, rename)}")
