"""Exact angle expressions, relations and span checks."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from cyclic_forge.algebra import (AngleExpr, LinearRelation, expr_combine, format_equation, format_expr, in_span,
                                  rank, relation_from_equality)

NAMES = ["w", "x", "y", "z"]
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
exprs = st.builds(
    lambda cs, pi: AngleExpr.from_mapping(dict(zip(NAMES, cs)), pi),
    st.lists(fractions, min_size=4, max_size=4),
    fractions,
)


def test_zero_coefficients_are_dropped():
    e = AngleExpr.from_mapping({"x": 0, "y": 2})
    assert e.names == ("y",)
    assert e["x"] == 0


def test_pi_is_reserved():
    with pytest.raises(ValueError):
        AngleExpr.var("pi")


def test_floats_rejected():
    with pytest.raises(TypeError):
        AngleExpr.var("x", 0.5)


@given(exprs, exprs)
def test_addition_commutes(a, b):
    assert a + b == b + a


@given(exprs)
def test_self_difference_is_zero(a):
    assert (a - a).is_zero()


@given(exprs, exprs, fractions)
def test_scale_distributes(a, b, c):
    assert (a + b).scale(c) == a.scale(c) + b.scale(c)


@given(exprs, exprs, fractions, fractions)
def test_combine_matches_scaled_sum(a, b, ca, cb):
    assert expr_combine(a, ca, b, cb) == a * ca + b * cb


@given(exprs)
def test_json_round_trip(a):
    assert AngleExpr.from_json(a.to_json()) == a


@given(exprs, st.fractions(min_value=-5, max_value=5, max_denominator=6).filter(lambda c: c != 0))
def test_normalized_is_scale_invariant(a, c):
    if a.is_zero():
        return
    assert LinearRelation.normalized(a).expr == LinearRelation.normalized(a.scale(c)).expr


@given(exprs)
def test_normalized_is_idempotent(a):
    if a.is_zero():
        return
    once = LinearRelation.normalized(a).expr
    assert LinearRelation.normalized(once).expr == once


def test_normalized_integer_coefficients_keep_fractional_pi():
    e = AngleExpr.from_mapping({"x": Fraction(-1, 2), "y": Fraction(1, 2), "z": Fraction(1, 2)}, Fraction(-1, 4))
    rel = LinearRelation.normalized(e)
    assert rel.expr == AngleExpr.from_mapping({"x": 1, "y": -1, "z": -1}, Fraction(1, 2))


def test_relation_from_equal_values_is_none():
    a = AngleExpr.var("x") + AngleExpr.const(1)
    assert relation_from_equality(a, a) is None


@given(exprs, exprs, exprs)
def test_substitute_matches_manual_expansion(a, b, value):
    sub = (a + b).substitute("x", value)
    assert sub["x"] == value["x"] * (a + b)["x"]
    assert sub.pi == (a + b).pi + (a + b)["x"] * value.pi


def _sympy_rank(vs):
    names = sorted({n for v in vs for n in v.names})
    m = sympy.Matrix([[sympy.Rational(v[n].numerator, v[n].denominator) for n in names]
                      + [sympy.Rational(v.pi.numerator, v.pi.denominator)] for v in vs])
    return m.rank()


@given(st.lists(exprs, min_size=1, max_size=4))
def test_rank_matches_sympy(vs):
    assert rank(vs) == _sympy_rank(vs)


@given(st.lists(exprs, min_size=0, max_size=3), exprs)
def test_in_span_matches_sympy(basis, cand):
    stacked = basis + [AngleExpr.const(1)]
    expected = _sympy_rank(stacked) == _sympy_rank(stacked + [cand])
    assert in_span(cand, basis) == expected


def test_format_orders_positive_then_negative_then_constant():
    e = AngleExpr.from_mapping({"x": 1, "y": -1, "w": 1}, Fraction(1, 2))
    assert format_expr(e, ["x", "y", "w"], degrees=True) == "x+w-y+90"
    assert format_expr(AngleExpr.from_mapping({"z": -1, "w": -1}, 1), ["z", "w"], degrees=True) == "180-z-w"


def test_format_equation_moves_negatives_right():
    e = AngleExpr.from_mapping({"x": 1, "y": -1, "z": -1}, Fraction(1, 2))
    assert format_equation(e, ["x", "y", "z"], degrees=True) == "x+90=y+z"
