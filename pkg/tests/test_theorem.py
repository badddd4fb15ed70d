"""The angle system, its consistency condition and the undirected restatement."""

import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from cyclic_forge.algebra import AngleExpr
from cyclic_forge.geometry import build_polygon, random_positions
from cyclic_forge.pairings import Pairing, enumerate_pairings, random_pairing
from cyclic_forge.theorem import (InconsistentSystem, build_expanded_system, build_system, classify,
                                  consistency_relation, delta_name, delta_relation_direct, left_null_space,
                                  reduce_expanded, relation_by_elimination, statement_residual, to_psi_statement,
                                  triangularize, verify_numeric)

QUAD = Pairing.of([(1, 2), (3, 4)])
DECAGON = Pairing.of([(1, 2), (3, 10), (4, 7), (5, 8), (6, 9)])
d12, d34 = AngleExpr.var(delta_name(1, 2)), AngleExpr.var(delta_name(3, 4))


def ints(rows):
    return [[int(x) for x in r] for r in rows]


def test_quadrilateral_expanded_system():
    e = build_expanded_system(QUAD)
    assert ints(e.matrix) == [
        [1, 1, 0, 0, 0, -2, 0, 0, 0],
        [0, 1, 1, 0, 0, 0, -2, 0, 0],
        [0, 0, 1, 1, 0, 0, 0, -2, 0],
        [0, 0, 0, 1, 1, 0, 0, 0, -2],
        [-1, 0, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, -1, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, -1, 1],
    ]
    zero = AngleExpr.zero()
    assert e.rhs == (zero, zero, zero, zero, AngleExpr.const(2), d12, d34)


def test_quadrilateral_reduced_and_triangular_systems():
    s = build_system(QUAD)
    assert reduce_expanded(build_expanded_system(QUAD)) == s
    assert ints(s.matrix) == [[1, 0, 0, 1, -2, 0], [1, 1, 0, 0, -2, 0], [0, 1, 1, 0, 0, -2], [0, 0, 1, 1, 0, -2]]
    assert s.rhs == (AngleExpr.const(2), d12 * 2, AngleExpr.zero(), d34 * 2)
    t = triangularize(s)
    assert ints(t.matrix) == [[1, 0, 0, 1, -2, 0], [0, 1, 0, -1, 0, 0], [0, 0, 1, 1, 0, -2], [0, 0, 0, 0, 0, 0]]
    two_pi = AngleExpr.const(2)
    assert t.rhs == (two_pi, d12 * 2 - two_pi, two_pi - d12 * 2, d12 * 2 + d34 * 2 - two_pi)
    rel = consistency_relation(t)
    assert str(rel) == "δ1,2+δ3,4=π"


def test_quadrilateral_angles_supplementary():
    poly = build_polygon([0.2, 1.9, 3.3, 4.8])
    st = to_psi_statement(delta_relation_direct(QUAD), poly)
    assert [t.coefficient for t in st.psi_terms] == [1, 1]
    assert st.constant == 1
    assert st.render() == "psi01_02+psi03_04=π"


def test_even_gap_pairing_is_inconsistent():
    s = build_system([(1, 3), (2, 4)])
    with pytest.raises(InconsistentSystem):
        consistency_relation(triangularize(s))


def test_decagon_delta_signs():
    rel = consistency_relation(triangularize(build_system(DECAGON)))
    assert [sign for sign, _ in rel.terms] == [1, 1, -1, 1, -1]
    assert rel.constant == 1
    assert str(rel) == "δ1,2+δ3,10-δ4,7+δ5,8-δ6,9=π"


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_three_routes_agree(n):
    for p in enumerate_pairings(n):
        s = build_system(p)
        direct = delta_relation_direct(p)
        assert consistency_relation(triangularize(s)) == direct
        assert relation_by_elimination(s) == direct


def _sympy_left_null(p):
    s = build_system(p)
    m = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in s.matrix])
    return s, m.T.nullspace()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_relation_matches_sympy_nullspace(n):
    for p in enumerate_pairings(n):
        s, null = _sympy_left_null(p)
        assert len(null) == 1
        y = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in null[0]]
        combo = AngleExpr()
        for c, q in zip(y, s.rhs):
            combo = combo + q.scale(c)
        k = combo[delta_name(*p.pairs[0])]
        direct = delta_relation_direct(p)
        for sign, pair in direct.terms:
            assert combo[delta_name(*pair)] / k == sign
        assert -combo.pi / k == direct.constant


def test_left_null_space_of_identity_is_empty():
    eye = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    assert left_null_space(eye) == []


@given(st.integers(2, 6), st.integers(0, 10**9), st.sampled_from([None, None, 1, -1, 2, -2]))
def test_identity_holds_numerically(n, seed, w):
    if w is not None and abs(w) >= n:
        w = 1
    rng = random.Random(seed)
    poly = build_polygon(random_positions(2 * n, rng, w))
    assert verify_numeric(poly, random_pairing(n, seed)) < 1e-9


@given(st.floats(-3, 3), st.floats(0.01, 3.1), st.sampled_from([-1, 1]), st.integers(-4, 4))
def test_classify_recovers_offset(base, psi, e, c):
    assert classify(c * math.pi / 2 + e * psi, psi) == (c, e) or math.isclose(psi, math.pi / 2, abs_tol=1e-6)


def test_decagon_regular_gives_clockwise_statement():
    poly = build_polygon([2 * math.pi * k / 10 for k in range(10)])
    st = to_psi_statement(delta_relation_direct(DECAGON), poly)
    assert st.orientation_signs[(3, 10)] == -1
    assert st.render() == "psi03_10+psi04_07+psi06_09=psi01_02+psi05_08"
    assert statement_residual(st, poly) < 1e-9


def test_decagon_flipped_pair_statement():
    poly = build_polygon([math.radians(t) for t in (34, 109, 125, 171, 188, 202, 218, 236, 267, 302)])
    st = to_psi_statement(delta_relation_direct(DECAGON), poly)
    assert st.orientation_signs[(3, 10)] == 1
    expected = AngleExpr.from_mapping({"psi04_07": 1, "psi06_09": 1, "psi01_02": -1, "psi05_08": -1, "psi03_10": -1})
    assert st.as_expr() in (expected, -expected)
    assert statement_residual(st, poly) < 1e-9
