"""The angle system of a side pairing and the constant combination it forces.

Row ``j`` of the system encodes ``theta[j-1] + theta[j] - 2 phi[j] = 0`` with
``phi[b] = phi[a] + delta(a, b)`` folded into the right-hand side, so one
shared unknown stands for both sides of a pair. Alternating row differences
annihilate every unknown and leave a single consistency condition on the
deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import AngleExpr
from .geometry import CyclicPolygon, TOL, delta, side_pair_angle
from .pairings import Pairing


class InconsistentSystem(ValueError):
    pass


def delta_name(a: int, b: int) -> str:
    return f"d{a:02d}_{b:02d}"


def psi_name(a: int, b: int) -> str:
    return f"psi{a:02d}_{b:02d}"


def _pairs_of(p: Pairing | Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    pairs = p.pairs if isinstance(p, Pairing) else tuple(tuple(sorted(q)) for q in p)
    flat = sorted(x for q in pairs for x in q)
    if flat != list(range(1, len(flat) + 1)) or len(flat) != 2 * len(pairs):
        raise ValueError(f"pairs {pairs} do not partition the sides")
    return tuple(sorted(pairs))


@dataclass(frozen=True)
class AngleSystem:
    """``matrix @ (theta_1..theta_2n, phi'_1..phi'_n) = rhs`` with exact entries."""

    pairs: tuple[tuple[int, int], ...]
    winding: int
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[AngleExpr, ...]

    @property
    def columns(self) -> list[str]:
        m = 2 * len(self.pairs)
        return [f"theta{i}" for i in range(1, m + 1)] + [f"phi'{k}" for k in range(1, len(self.pairs) + 1)]


def build_system(p: Pairing | Iterable[Sequence[int]], winding: int = 1) -> AngleSystem:
    """Assemble the 2n x 3n system for a pairing.

    Accepts raw pairs too, so that invalid (even-gap) pairings can be fed to
    :func:`consistency_relation` and rejected there.
    """
    pairs = _pairs_of(p)
    n = len(pairs)
    m = 2 * n
    rows = []
    rhs = []
    for j in range(1, m + 1):
        row = [Fraction(0)] * (m + n)
        row[j - 1] += 1
        row[(j - 2) % m] += 1  # theta_{j-1}; row 1 wraps to theta_{2n}
        q = AngleExpr.const(2 * winding) if j == 1 else AngleExpr.zero()
        for k, (a, b) in enumerate(pairs):
            if j in (a, b):
                row[m + k] = Fraction(-2)
            if j == b and j > 1:
                q = AngleExpr.var(delta_name(a, b), 2)
        rows.append(tuple(row))
        rhs.append(q)
    return AngleSystem(pairs, winding, tuple(rows), tuple(rhs))


@dataclass(frozen=True)
class ExpandedSystem:
    """Unreduced form over ``theta_0..theta_2n`` and one ``phi`` per side.

    Rows: ``theta[j-1] + theta[j] - 2 phi[j] = 0`` for every side, then
    ``theta[2n] - theta[0] = 2 pi W``, then ``phi[b] - phi[a] = delta(a, b)``
    for every pair.
    """

    pairs: tuple[tuple[int, int], ...]
    winding: int
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[AngleExpr, ...]


def build_expanded_system(p: Pairing, winding: int = 1) -> ExpandedSystem:
    pairs = _pairs_of(p)
    m = 2 * len(pairs)
    width = (m + 1) + m
    rows, rhs = [], []
    for j in range(1, m + 1):
        row = [Fraction(0)] * width
        row[j - 1] += 1
        row[j] += 1
        row[m + j] = Fraction(-2)
        rows.append(tuple(row))
        rhs.append(AngleExpr.zero())
    row = [Fraction(0)] * width
    row[0], row[m] = Fraction(-1), Fraction(1)
    rows.append(tuple(row))
    rhs.append(AngleExpr.const(2 * winding))
    for a, b in pairs:
        row = [Fraction(0)] * width
        row[m + a], row[m + b] = Fraction(-1), Fraction(1)
        rows.append(tuple(row))
        rhs.append(AngleExpr.var(delta_name(a, b)))
    return ExpandedSystem(pairs, winding, tuple(rows), tuple(rhs))


def reduce_expanded(e: ExpandedSystem) -> AngleSystem:
    """Fold the closing row into row 1 and each pair row (twice) into row ``b``,
    then drop ``theta_0`` and every ``phi_b`` column, which are now zero."""
    m = 2 * len(e.pairs)
    rows = [list(r) for r in e.matrix[:m]]
    rhs = list(e.rhs[:m])

    def fold(target: int, source: int, factor: int) -> None:
        rows[target] = [x + factor * y for x, y in zip(rows[target], e.matrix[source])]
        rhs[target] = rhs[target] + e.rhs[source].scale(factor)

    fold(0, m, 1)
    for k, (a, b) in enumerate(e.pairs):
        fold(b - 1, m + 1 + k, 2)
    keep = list(range(1, m + 1)) + [m + a for a, _ in e.pairs]
    dropped = [c for c in range(len(rows[0])) if c not in keep]
    if any(r[c] != 0 for r in rows for c in dropped):
        raise InconsistentSystem("row operations left a nonzero entry in a dropped column")
    matrix = tuple(tuple(r[c] for c in keep) for r in rows)
    return AngleSystem(e.pairs, e.winding, matrix, tuple(rhs))


def triangularize(s: AngleSystem) -> AngleSystem:
    """``T_1 = R_1`` and ``T_i = R_i - T_{i-1}`` on rows and right-hand side."""
    rows = [s.matrix[0]]
    rhs = [s.rhs[0]]
    for r, q in zip(s.matrix[1:], s.rhs[1:]):
        rows.append(tuple(x - y for x, y in zip(r, rows[-1])))
        rhs.append(q - rhs[-1])
    return AngleSystem(s.pairs, s.winding, tuple(rows), tuple(rhs))


@dataclass(frozen=True)
class DeltaRelation:
    """``sum(sign * delta(a, b)) = constant * pi``."""

    terms: tuple[tuple[int, tuple[int, int]], ...]
    constant: Fraction

    def residual(self, poly: CyclicPolygon) -> float:
        total = sum(s * delta(poly, a, b) for s, (a, b) in self.terms)
        return abs(total - float(self.constant) * math.pi)

    def __str__(self) -> str:
        lhs = "".join(("+" if s > 0 else "-") + f"δ{a},{b}" for s, (a, b) in self.terms)
        return f"{lhs.lstrip('+')}={_pi_text(self.constant)}"


def _pi_text(c: Fraction) -> str:
    if c == 0:
        return "0"
    if c == 1:
        return "π"
    if c == -1:
        return "-π"
    return f"{c}π"


def consistency_relation(t: AngleSystem) -> DeltaRelation:
    """Read ``S = 0`` off the final triangularized row."""
    last = t.matrix[-1]
    if any(x != 0 for x in last):
        raise InconsistentSystem("final row keeps nonzero unknown coefficients; "
                                 "every pair needs an odd gap")
    s = t.rhs[-1]
    # s = 2 * sum(sign * delta) - 2 pi W
    by_name = {delta_name(a, b): (a, b) for a, b in t.pairs}
    terms = []
    for name, c in s.coeffs:
        sign = c / 2
        if abs(sign) != 1:
            raise InconsistentSystem(f"unexpected coefficient {c} on {name}")
        terms.append((int(sign), by_name[name]))
    order = {p: k for k, p in enumerate(t.pairs)}
    terms.sort(key=lambda st: order[st[1]])
    return DeltaRelation(tuple(terms), -s.pi / 2)


def left_null_space(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Basis of ``{y : y @ matrix = 0}`` by elimination on ``[matrix | I]``."""
    rows = [list(r) + [Fraction(int(i == k)) for k in range(len(matrix))] for i, r in enumerate(matrix)]
    ncols = len(matrix[0]) if matrix else 0
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(r + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return [row[ncols:] for row in rows[r:]]


def relation_by_elimination(s: AngleSystem) -> DeltaRelation:
    """Combine the rows annihilated by the left null vector; no recurrence used."""
    null = left_null_space(s.matrix)
    if len(null) != 1:
        raise InconsistentSystem(f"left null space has dimension {len(null)}, expected 1")
    (y,) = null
    combo = AngleExpr()
    for c, q in zip(y, s.rhs):
        combo = combo + q.scale(c)
    # combo = 0 reads k * (sum(sign * delta) - W pi) = 0 for some k
    by_name = {delta_name(a, b): (a, b) for a, b in s.pairs}
    # side 1 pairs with an even side, so its delta carries sign +1
    k = combo[delta_name(*s.pairs[0])]
    terms = sorted(((int(v / k), by_name[name]) for name, v in combo.coeffs), key=lambda t: t[1])
    return DeltaRelation(tuple(terms), -combo.pi / k)


def delta_relation_direct(p: Pairing, winding: int = 1) -> DeltaRelation:
    return DeltaRelation(
        tuple(((-1) ** b, (a, b)) for a, b in p.pairs), Fraction(winding)
    )


def verify_numeric(poly: CyclicPolygon, p: Pairing) -> float:
    """``|sum((-1)^b delta(a, b)) - W pi|`` for the polygon's own winding number."""
    if poly.size != 2 * p.n:
        raise ValueError("polygon and pairing sizes differ")
    return delta_relation_direct(p, poly.winding).residual(poly)


# -- translation into undirected angles ------------------------------------

def classify(delta_value: float, psi: float) -> tuple[int, int]:
    """Find ``(c, e)`` with ``delta = c*pi/2 + e*psi``, ``e`` in {-1, +1}.

    ``c`` is odd only when ``psi`` is measured against a radius standing in
    for a tangent line.
    """
    best = None
    for e in (-1, 1):
        x = (delta_value - e * psi) / (math.pi / 2)
        c = round(x)
        err = abs(x - c)
        if best is None or err < best[0]:
            best = (err, c, e)
    err, c, e = best
    if err * math.pi / 2 > 1e-6:
        raise ValueError(f"delta {delta_value} is not a half-pi multiple away from ±{psi}")
    return c, e


@dataclass(frozen=True)
class PsiTerm:
    coefficient: int
    pair: tuple[int, int]
    name: str


@dataclass(frozen=True)
class TheoremStatement:
    """``sum(coefficient * psi) = constant * pi``, plus the delta relation it came from.

    ``offsets[pair] = c`` and ``orientation_signs[pair] = s`` record the
    measured link ``delta = c*pi/2 - s*psi``; the convex, winding-one case
    always has ``c = 2``.
    """

    delta: DeltaRelation
    psi_terms: tuple[PsiTerm, ...]
    constant: Fraction
    orientation_signs: dict = field(default_factory=dict)
    offsets: dict = field(default_factory=dict)
    winding: int = 1

    @property
    def lhs(self) -> list[PsiTerm]:
        return [t for t in self.psi_terms if t.coefficient > 0]

    @property
    def rhs(self) -> list[PsiTerm]:
        return [t for t in self.psi_terms if t.coefficient < 0]

    def as_expr(self) -> AngleExpr:
        """``sum(coefficient * psi) - constant * pi`` (zero when the theorem holds)."""
        return AngleExpr(tuple((t.name, t.coefficient) for t in self.psi_terms), -self.constant)

    def residual(self, values: dict[str, float]) -> float:
        return abs(self.as_expr().evaluate(values))

    def render(self, degrees: bool = False) -> str:
        def side(terms, const):
            parts = [t.name for t in terms]
            if const:
                parts.append(_const_text(const, degrees))
            return "+".join(parts) if parts else "0"

        lhs, rhs, k = self.lhs, self.rhs, self.constant
        if not lhs:
            # keep the angles on the left: sum(|c| psi) = -k pi
            lhs, rhs, k = rhs, [], -k
        left_const = -k if k < 0 else Fraction(0)
        right_const = k if k > 0 else Fraction(0)
        return f"{side(lhs, left_const)}={side(rhs, right_const)}"

    def to_json(self) -> dict:
        pairs = [list(t.pair) for t in self.psi_terms]
        return {
            "pairs": pairs,
            "signs": [self.orientation_signs[t.pair] for t in self.psi_terms],
            "offsets": [self.offsets[t.pair] for t in self.psi_terms],
            "psi_lhs": [t.name for t in self.lhs],
            "psi_rhs": [t.name for t in self.rhs],
            "pi_constant": [self.constant.numerator, self.constant.denominator],
            "winding": self.winding,
            "text": self.render(),
        }


def _const_text(c: Fraction, degrees: bool) -> str:
    if degrees:
        v = c * 180
        return str(v.numerator) if v.denominator == 1 else str(float(v))
    if c == 1:
        return "π"
    if c.denominator == 1:
        return f"{c.numerator}π"
    num = "" if c.numerator == 1 else str(c.numerator)
    return f"{num}π/{c.denominator}"


def statement_from_measurements(d: DeltaRelation, winding: int,
                                measured: dict[tuple[int, int], tuple[float, float]],
                                names: dict[tuple[int, int], str] | None = None,
                                signs: dict[tuple[int, int], int] | None = None) -> TheoremStatement:
    """Build the psi statement from per-pair ``(delta, psi)`` measurements."""
    names = names or {}
    terms = []
    offsets = {}
    orient = {}
    constant = Fraction(winding)
    for sign, pair in d.terms:
        dv, psi = measured[pair]
        c, e = classify(dv, psi)
        offsets[pair] = c
        orient[pair] = signs[pair] if signs and pair in signs else -e
        constant -= Fraction(sign * c, 2)
        terms.append(PsiTerm(sign * e, pair, names.get(pair, psi_name(*pair))))
    total = sum(t.coefficient for t in terms)
    if total < 0 or (total == 0 and constant < 0):
        # present the side with more angles as positive
        terms = [PsiTerm(-t.coefficient, t.pair, t.name) for t in terms]
        constant = -constant
    return TheoremStatement(d, tuple(terms), constant, orient, offsets, winding)


def to_psi_statement(d: DeltaRelation, poly: CyclicPolygon,
                     names: dict[tuple[int, int], str] | None = None) -> TheoremStatement:
    """Substitute each delta by its measured undirected angle on ``poly``."""
    if d.constant != poly.winding:
        d = DeltaRelation(d.terms, Fraction(poly.winding))
    measured = {}
    signs = {}
    for _, (a, b) in d.terms:
        spa = side_pair_angle(poly, a, b)
        measured[(a, b)] = (delta(poly, a, b), spa.psi)
        signs[(a, b)] = spa.orientation_sign
    st = statement_from_measurements(d, poly.winding, measured, names)
    return TheoremStatement(st.delta, st.psi_terms, st.constant, signs, st.offsets, st.winding)


def statement_residual(st: TheoremStatement, poly: CyclicPolygon) -> float:
    values = {t.name: side_pair_angle(poly, *t.pair).psi for t in st.psi_terms}
    return st.residual(values)


def psi_to_delta_holds(poly: CyclicPolygon, a: int, b: int) -> bool:
    """Check ``delta = pi - s*psi`` on this polygon (meaningful for convex, W = 1)."""
    spa = side_pair_angle(poly, a, b)
    return abs(delta(poly, a, b) - (math.pi - spa.orientation_sign * spa.psi)) < TOL
