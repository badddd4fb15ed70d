"""Forward-chaining angle deduction with exact coefficient vectors.

Every angle value is an :class:`~cyclic_forge.algebra.AngleExpr` over the
named given angles (and helper angles) plus pi. Rule instances are found
once per figure as linear equations between angles; a breadth-first sweep
then fires any equation with exactly one unvalued angle. An equation whose
angles are all valued but which does not balance exposes a linear relation
among the givens, which is the conclusion of the proof.

Rules:
  1. angle addition around a point
  2. angle sum of a triangle
  3. angles on a straight line
  4. inscribed angles on the same side of a chord are equal
  5. opposite angles of a cyclic quadrilateral are supplementary
  6. central angle is twice the inscribed angle (or 2pi minus it, when the
     inscribed angle looks at the chord from the side away from the center)
  7. base angles of the isosceles triangle on a chord and the center
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .algebra import AngleExpr, LinearRelation, format_equation, format_expr, in_span, relation_from_equality
from .figure import Figure, affine_form
from .geometry import cross, sub

GIVEN = 0
HELPER = -1
STEP_CAP = 10_000
BETWEEN_TOL = 1e-9

KNOWN_NAMES = ["x", "y", "z", "u", "v", "p", "q", "r"]
HELPER_NAMES = ["w", "t", "s", "k", "m", "n"]


class AugmentationExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Equation:
    """``sum(coeff * angle) = const * pi`` justified by ``rule``."""

    terms: tuple[tuple[int, Fraction], ...]
    const: Fraction
    rule: int
    info: tuple = ()

    def angles(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.terms)

    def coeff(self, angle: int) -> Fraction:
        return next(c for a, c in self.terms if a == angle)


def _eq(terms, const, rule, info=()) -> Equation:
    merged: dict[int, Fraction] = {}
    for a, c in terms:
        merged[a] = merged.get(a, Fraction(0)) + Fraction(c)
    return Equation(tuple(sorted((a, c) for a, c in merged.items() if c)), Fraction(const), rule, info)


def build_equations(fig: Figure) -> list[Equation]:
    """All rule instances available in ``fig``, in a deterministic order."""
    eqs: list[Equation] = []
    coords = fig.coords

    # rules 1 and 3: around each point
    for v in sorted(fig.rays):
        rays = sorted(fig.rays[v], key=lambda r: r.key)
        for r1, r2, r3 in combinations(rays, 3):
            if len({r1.line, r2.line, r3.line}) < 3:
                continue
            a12, a13, a23 = fig.angle_between(v, r1, r2), fig.angle_between(v, r1, r3), fig.angle_between(v, r2, r3)
            for big, p, q in ((a12, a13, a23), (a13, a12, a23), (a23, a12, a13)):
                if abs(big.value - p.value - q.value) < BETWEEN_TOL:
                    eqs.append(_eq([(big.id, 1), (p.id, -1), (q.id, -1)], 0, 1, (v,)))
                    break
        for r, r_opp in combinations(rays, 2):
            if r.line != r_opp.line:
                continue
            for s in rays:
                if s.line == r.line:
                    continue
                a1, a2 = fig.angle_between(v, r, s), fig.angle_between(v, s, r_opp)
                eqs.append(_eq([(a1.id, 1), (a2.id, 1)], 1, 3, (r.points[0], v, r_opp.points[0])))

    # rule 2: triangles of mutually connected points
    names = sorted(coords)
    for p, q, r in combinations(names, 3):
        if not (fig.connected(p, q) and fig.connected(q, r) and fig.connected(p, r)):
            continue
        if fig.line_of(p, q) is fig.line_of(q, r):
            continue
        angles = [fig.angle(q, p, r), fig.angle(p, q, r), fig.angle(p, r, q)]
        if any(a is None for a in angles):
            continue
        eqs.append(_eq([(a.id, 1) for a in angles], 1, 2, (p, q, r)))

    circle = fig.circle_points
    center = fig.center
    for x, y in combinations(circle, 2):
        px, py = coords[x], coords[y]
        chord = sub(py, px)

        def side(pt: str) -> int:
            return 1 if cross(chord, sub(coords[pt], px)) > 0 else -1

        inscribed = {}
        for p in circle:
            if p in (x, y):
                continue
            a = fig.angle(x, p, y)
            if a is not None:
                inscribed[p] = a
        # rules 4 and 5
        for p, q in combinations(sorted(inscribed), 2):
            ap, aq = inscribed[p], inscribed[q]
            if side(p) == side(q):
                eqs.append(_eq([(ap.id, 1), (aq.id, -1)], 0, 4, (x, y, p, q)))
            else:
                quad = tuple(sorted((x, p, y, q), key=lambda n: fig.defs[n].slot))
                eqs.append(_eq([(ap.id, 1), (aq.id, 1)], 1, 5, quad))
        if center is None or abs(cross(px, py)) < 1e-9:
            continue
        ao = fig.angle(x, center, y)
        if ao is None:
            continue
        # rule 6
        o_side = 1 if cross(chord, sub(coords[center], px)) > 0 else -1
        for p, ap in sorted(inscribed.items()):
            if side(p) == o_side:
                eqs.append(_eq([(ao.id, 1), (ap.id, -2)], 0, 6, (x, y, p, "same")))
            else:
                eqs.append(_eq([(ao.id, 1), (ap.id, 2)], 2, 6, (x, y, p, "opposite")))
        # rule 7
        bx, by = fig.angle(center, x, y), fig.angle(center, y, x)
        if bx is not None and by is not None:
            tri = (center, x, y)
            eqs.append(_eq([(bx.id, 1), (by.id, -1)], 0, 7, tri))
            eqs.append(_eq([(ao.id, 1), (bx.id, 2)], 1, 7, tri))
            eqs.append(_eq([(ao.id, 1), (by.id, 2)], 1, 7, tri))

    seen = set()
    out = []
    for e in eqs:
        k = (e.terms, e.const)
        if k not in seen:
            seen.add(k)
            out.append(e)
    return out


@dataclass
class Fact:
    angle: int
    value: AngleExpr
    rule: int
    equation: Equation | None
    inputs: tuple[int, ...]
    round: int
    order: int


@dataclass
class Conflict:
    angle: int
    existing: Fact
    alternative: Fact
    relation: LinearRelation


@dataclass
class DeductionState:
    """One proof attempt: a figure, its named angles and what has been derived."""

    figure: Figure
    givens: list[tuple[str, tuple[str, str, str]]]  # (variable, (x, v, y))
    helpers: list[tuple[str, tuple[str, str, str]]] = field(default_factory=list)
    added_segments: list[tuple[str, str]] = field(default_factory=list)
    facts: dict[int, Fact] = field(default_factory=dict)
    frontier: list[int] = field(default_factory=list)
    conflict: Conflict | None = None
    step_cap: int = STEP_CAP
    rng: random.Random | None = None  # shuffles firing order when set

    @property
    def variables(self) -> list[str]:
        return [v for v, _ in self.givens] + [v for v, _ in self.helpers]

    _fig_cache: dict = field(default_factory=dict, repr=False)

    @property
    def fig(self) -> Figure:
        """The figure with every augmentation segment drawn."""
        if not self.added_segments:
            return self.figure
        key = tuple(self.added_segments)
        if key not in self._fig_cache:
            self._fig_cache.clear()
            self._fig_cache[key] = self.figure.with_segments(self.added_segments)
        return self._fig_cache[key]

    @property
    def found_relation(self) -> LinearRelation | None:
        return self.conflict.relation if self.conflict else None

    def equations(self) -> tuple[list["Equation"], dict[int, list[int]]]:
        """Rule equations of the current figure and, per angle, the equations using it."""
        fig = self.fig
        key = ("eqs", tuple(self.added_segments))
        if key not in self._fig_cache:
            eqs = build_equations(fig)
            by_angle: dict[int, list[int]] = {}
            for k, e in enumerate(eqs):
                for a in e.angles():
                    by_angle.setdefault(a, []).append(k)
            self._fig_cache[key] = (eqs, by_angle)
        return self._fig_cache[key]


def _fresh_names(pool: Sequence[str], used: Iterable[str]) -> Iterable[str]:
    used = set(used)
    for n in pool:
        if n not in used:
            yield n
    k = 1
    while True:
        if f"h{k}" not in used:
            yield f"h{k}"
        k += 1


def _trace_size(facts: dict[int, Fact], roots: Iterable[int]) -> set[int]:
    seen: set[int] = set()
    stack = list(roots)
    while stack:
        a = stack.pop()
        if a in seen:
            continue
        seen.add(a)
        stack.extend(facts[a].inputs)
    return seen


def saturate(state: DeductionState) -> DeductionState:
    """Breadth-first closure under the seven rules.

    Stops at the first round that exposes a relation (keeping the conflict
    with the smallest supporting derivation) or when nothing new appears.
    """
    fig = state.fig
    eqs, by_angle = state.equations()

    facts: dict[int, Fact] = {}
    order = 0
    for rule, named in ((GIVEN, state.givens), (HELPER, state.helpers)):
        for var, (x, v, y) in named:
            a = fig.require_angle(x, v, y)
            if a.id in facts:
                raise ValueError(f"angle {a.name} is named twice")
            facts[a.id] = Fact(a.id, AngleExpr.var(var), rule, None, (), 0, order)
            order += 1
    frontier = sorted(facts)
    conflict: Conflict | None = None
    rnd = 0
    while frontier and conflict is None:
        rnd += 1
        known = set(facts)
        touched = sorted({k for a in frontier for k in by_angle.get(a, ())})
        if state.rng is not None:
            state.rng.shuffle(touched)
        candidates: dict[int, list[Fact]] = {}
        conflicts: list[Conflict] = []
        for k in touched:
            e = eqs[k]
            unknown = [a for a in e.angles() if a not in known]
            if len(unknown) > 1:
                continue
            if unknown:
                target = unknown[0]
            else:
                residual = sum((facts[a].value * c for a, c in e.terms), AngleExpr()) - AngleExpr.const(e.const)
                if residual.is_zero():
                    continue
                derived = [a for a in e.angles() if facts[a].rule not in (GIVEN, HELPER)]
                pool = derived or list(e.angles())
                target = min(pool, key=lambda a: fig.angles[a].name)
            rest = AngleExpr.const(e.const)
            for a, c in e.terms:
                if a != target:
                    rest = rest - facts[a].value * c
            value = rest.scale(1 / e.coeff(target))
            inputs = tuple(a for a in e.angles() if a != target)
            fact = Fact(target, value, e.rule, e, inputs, rnd, order)
            order += 1
            if unknown:
                candidates.setdefault(target, []).append(fact)
            else:
                rel = relation_from_equality(facts[target].value, value)
                conflicts.append(Conflict(target, facts[target], fact, rel))
        new = []
        for target in sorted(candidates, key=lambda a: fig.angles[a].name):
            first, *others = candidates[target]
            facts[target] = first
            new.append(target)
            for alt in others:
                rel = relation_from_equality(first.value, alt.value)
                if rel is not None:
                    conflicts.append(Conflict(target, first, alt, rel))
            if len(facts) > state.step_cap:
                break
        if conflicts:
            def cost(c: Conflict):
                support = _trace_size(facts, [c.angle, *c.alternative.inputs])
                return (len(support), fig.angles[c.angle].name, c.alternative.rule, c.alternative.order)
            conflict = min(conflicts, key=cost)
        if len(facts) > state.step_cap:
            break
        frontier = new
    state.facts = facts
    state.frontier = frontier
    state.conflict = conflict
    return state


# -- augmentation ------------------------------------------------------------

def _affine_expr(fig: Figure, triple: tuple[str, str, str]) -> AngleExpr:
    coeffs, pi = affine_form(fig, *triple)
    return AngleExpr.from_mapping({f"t{k}": c for k, c in enumerate(coeffs)}, pi)


def augment(state: DeductionState, greedy: bool = False) -> DeductionState:
    """Add one missing chord, or failing that name one independent helper angle.

    Chords between circle points are tried in lexicographic order of their
    endpoint labels. A helper angle must be unvalued and its dependence on
    the circle positions must lie outside the span of the named angles, so
    it can never survive into a relation among the givens. The first such
    angle in name order is used; with ``greedy`` every candidate is tried
    and, unless the first one exposes a relation, the one deriving the most
    angles wins.
    """
    fig = state.fig
    circle = sorted(fig.circle_points)
    for a, b in combinations(circle, 2):
        if not fig.connected(a, b):
            state.added_segments.append((a, b))
            return saturate(state)
    named = [t for _, t in state.givens + state.helpers]
    basis = [_affine_expr(fig, t) for t in named]
    var = next(_fresh_names(HELPER_NAMES, state.variables))
    best = None
    for ang in sorted(fig.angles, key=lambda a: a.name):
        if ang.id in state.facts:
            continue
        x, y = ang.arms
        triple = (x, ang.vertex, y)
        if in_span(_affine_expr(fig, triple), basis):
            continue
        if not greedy:
            state.helpers.append((var, triple))
            return saturate(state)
        trial = saturate(replace(state, helpers=state.helpers + [(var, triple)], facts={}, frontier=[],
                                 conflict=None))
        if trial.conflict is not None and best is None:
            best = trial
            break
        if best is None or len(trial.facts) > len(best.facts):
            best = trial
    if best is None:
        raise AugmentationExhausted("every segment is drawn and no independent angle remains")
    state.helpers.append(best.helpers[-1])
    return saturate(state)


def prove(state: DeductionState, max_rounds: int = 64) -> "ProofTrace":
    """Saturate, augmenting as needed, until a relation among the givens appears.

    If helpers taken in name order run out first, the attempt restarts from
    the original figure with greedy helper choice.
    """
    start = (list(state.helpers), list(state.added_segments))
    try:
        return _prove(state, max_rounds, greedy=False)
    except AugmentationExhausted:
        state.helpers, state.added_segments = list(start[0]), list(start[1])
        return _prove(state, max_rounds, greedy=True)


def _prove(state: DeductionState, max_rounds: int, greedy: bool) -> "ProofTrace":
    saturate(state)
    for _ in range(max_rounds):
        if state.conflict is not None:
            return extract_trace(state)
        augment(state, greedy)
    if state.conflict is not None:
        return extract_trace(state)
    raise AugmentationExhausted(f"no relation after {max_rounds} augmentations")


# -- traces -------------------------------------------------------------------

@dataclass
class ProofTrace:
    state: DeductionState
    steps: list[Fact]
    conflict: Conflict
    segments_used: list[tuple[str, str]]

    @property
    def conclusion(self) -> LinearRelation:
        return self.conflict.relation

    @property
    def rules(self) -> list[int]:
        return [f.rule for f in self.steps] + [self.conflict.alternative.rule]

    def name_of(self, angle: int) -> str:
        return self.state.fig.angles[angle].name

    def relation_in_names(self) -> AngleExpr:
        names = {var: _angle_name(self.state.fig, t) for var, t in self.state.givens + self.state.helpers}
        return AngleExpr(tuple((names[k], v) for k, v in self.conclusion.expr.coeffs), self.conclusion.expr.pi)

    def to_json(self) -> dict:
        def fact_json(f: Fact) -> dict:
            return {
                "rule": f.rule,
                "inputs": [self.name_of(a) for a in f.inputs],
                "output": self.name_of(f.angle),
                "value": f.value.to_json(),
            }
        st = self.state
        return {
            "givens": [{"name": v, "angle": "".join(t)} for v, t in st.givens],
            "helpers": [{"name": v, "angle": "".join(t)} for v, t in st.helpers],
            "segments_added": ["".join(s) for s in self.segments_used],
            "steps": [fact_json(f) for f in self.steps] + [fact_json(self.conflict.alternative)],
            "conclusion": self.conclusion.expr.to_json(),
        }


def _angle_name(fig: Figure, triple: tuple[str, str, str]) -> str:
    return fig.require_angle(*triple).name


def extract_trace(state: DeductionState) -> ProofTrace:
    c = state.conflict
    support = _trace_size(state.facts, [c.angle, *c.alternative.inputs])
    steps = sorted((state.facts[a] for a in support if state.facts[a].rule not in (GIVEN, HELPER)),
                   key=lambda f: (f.round, f.order))
    fig = state.fig
    used_lines = set()
    for f in steps + [c.alternative]:
        for a in (f.angle, *f.inputs):
            ang = fig.angles[a]
            used_lines.update(r.line for r in ang.rays)
        if f.rule == 2:
            p, q, r = f.equation.info
            used_lines.update(fig.line_of(*s).index for s in ((p, q), (q, r), (p, r)))
    used = [s for s in state.added_segments if fig.line_of(*s).index in used_lines]
    return ProofTrace(state, steps, c, used)


def check_soundness(state: DeductionState) -> float:
    """Largest gap between a derived value and the measured angle, in radians."""
    fig = state.fig
    values = {}
    for var, t in state.givens + state.helpers:
        values[var] = fig.require_angle(*t).value
    worst = 0.0
    for f in state.facts.values():
        worst = max(worst, abs(f.value.evaluate(values) - fig.angles[f.angle].value))
    return worst


# -- prose ----------------------------------------------------------------

def _deg(expr: AngleExpr, order: Sequence[str]) -> str:
    return format_expr(expr, order, degrees=True)


def render_proof(trace: ProofTrace) -> str:
    """Prose proof, one sentence per rule application."""
    st = trace.state
    fig = st.fig
    order = st.variables
    lines: list[str] = []

    def nm(a: int) -> str:
        return "∠" + fig.angles[a].name

    def val(a: int, facts: dict[int, Fact]) -> str:
        return _deg(facts[a].value, order)

    for s in trace.segments_used:
        lines.append(f"Draw line {s[0]}{s[1]}.")
    lines.append(" ".join(f"Let ∠{_angle_name(fig, t)}={v}." for v, t in st.givens))
    for v, t in st.helpers:
        lines.append(f"Let ∠{_angle_name(fig, t)}={v}.")
    for f in trace.steps:
        lines.append(_sentence(f, fig, st.facts, order, nm, val))
    c = trace.conflict
    alt = c.alternative
    lines.append(_sentence(alt, fig, st.facts, order, nm, val, final=True))
    old = _deg(c.existing.value, order)
    new = _deg(alt.value, order)
    rel = trace.conclusion.expr
    rename = {var: "∠" + _angle_name(fig, t) for var, t in st.givens + st.helpers}
    lines.append(f"But {nm(c.angle)}={old}, so {new}={old}, or "
                 f"{format_equation(rel, order, degrees=True)}, or "
                 f"{format_equation(rel, order, degrees=True, rename=rename)}.")
    return "\n".join(lines) + "\n"


def _sentence(f: Fact, fig: Figure, facts, order, nm, val, final: bool = False) -> str:
    out = nm(f.angle)
    value = _deg(f.value, order)
    given = " and ".join(f"{nm(a)}={val(a, facts)}" for a in f.inputs)
    info = f.equation.info
    if f.rule == 4:
        (src,) = f.inputs
        x, y = info[:2]
        return f"{nm(src)} and {out} subtend chord {x}{y} from the same side, so {out}={value}."
    if f.rule == 5:
        (src,) = f.inputs
        quad = "".join(info)
        return f"As {quad} is a cyclic quadrilateral, {out}=180-{nm(src)}, so {out}={value}."
    if f.rule == 6:
        x, y, p, variant = info
        central = nm(next(a for a in (f.angle, *f.inputs) if fig.angles[a].vertex == fig.center))
        inscribed = nm(next(a for a in (f.angle, *f.inputs) if fig.angles[a].vertex == p))
        rel = f"{central}=2{inscribed}" if variant == "same" else f"{central}=360-2{inscribed}"
        where = "" if variant == "same" else " from the side away from the center"
        return (f"As {central} is the central angle on chord {x}{y} and {inscribed} is inscribed on it"
                f"{where}, {rel}, so {out}={value}.")
    if f.rule == 7:
        o, x, y = info
        return f"As triangle {x}{y}{o} is isosceles, {out}={value}."
    if f.rule == 2:
        p, q, r = info
        return f"In triangle {p}{q}{r}, as {given}, {out}={value}."
    if f.rule == 3:
        a, v, b = info
        return f"As {a}{v}{b} is a straight line and {given}, {out}={value}."
    return f"As {given}, {out}={value}."


def trace_json(trace: ProofTrace) -> str:
    return json.dumps(trace.to_json(), indent=1)


# -- problem text -------------------------------------------------------------

MODES = ("prove", "find-numeric", "find-symbolic")


@dataclass(frozen=True)
class PosedProblem:
    mode: str
    text: str
    unknown: str | None = None
    givens: dict = field(default_factory=dict)  # angle name -> degrees or variable
    answer: str | None = None

    def to_json(self) -> dict:
        return {"mode": self.mode, "text": self.text, "unknown": self.unknown,
                "givens": self.givens, "answer": self.answer}


def describe_figure(fig: Figure) -> str:
    """Plain description of the points: circle order, center and intersections."""
    circle = "".join(fig.circle_points)
    center = fig.center
    parts = [f"Points {', '.join(circle)} lie in that order on a circle"
             + (f" with center {center}." if center else ".")]
    for name, d in sorted(fig.defs.items()):
        if d.kind == "meet":
            a, b, c, e = d.args
            parts.append(f"Lines {a}{b} and {c}{e} meet at {name}.")
    return " ".join(parts)


def pose_problem(statement, trace: ProofTrace, mode: str = "prove",
                 values: dict[str, float] | None = None, unknown: str | None = None) -> PosedProblem:
    """Phrase a statement as a problem.

    ``prove`` asks for the statement itself. ``find-numeric`` gives every
    other marked angle in whole degrees (``values``, or the measured angles
    rounded) and asks for ``unknown``. ``find-symbolic`` names the other
    angles with variables and asks for ``unknown`` in terms of them. The
    unknown defaults to the first term of the statement.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    intro = describe_figure(trace.state.figure)
    if mode == "prove":
        return PosedProblem(mode, f"{intro} Prove that {statement.render(degrees=True)}.")
    terms = list(statement.lhs + statement.rhs)
    names = [t.name for t in terms]
    unknown = unknown or names[0]
    if unknown not in names:
        raise KeyError(f"{unknown} is not a term of the statement")
    coef = {t.name: Fraction(t.coefficient) for t in terms}
    others = [n for n in names if n != unknown]
    if mode == "find-symbolic":
        var = dict(zip(others, KNOWN_NAMES))
        expr = AngleExpr.const(statement.constant)
        for n in others:
            expr = expr - AngleExpr.var(var[n], coef[n])
        expr = expr.scale(1 / coef[unknown])
        lets = " and ".join(f"{n}={var[n]}" for n in others)
        answer = f"{unknown}={format_expr(expr, list(var.values()), degrees=True)}"
        text = f"{intro} Let {lets}. Express {unknown} in terms of {', '.join(var[n] for n in others)}."
        return PosedProblem(mode, text, unknown, var, answer)
    fig = trace.state.figure
    given = {}
    for n in others:
        if values is not None and n in values:
            given[n] = Fraction(values[n])
        else:
            given[n] = Fraction(round(math.degrees(fig.angle_by_name[n.lstrip("∠")].value)))
    total = statement.constant * 180 - sum(coef[n] * given[n] for n in others)
    answer = total / coef[unknown]
    shown = " and ".join(f"{n}={_num(given[n])}°" for n in others)
    text = f"{intro} Given {shown}, find {unknown}."
    return PosedProblem(mode, text, unknown, {n: _num(v) for n, v in given.items()},
                        f"{unknown}={_num(answer)}°")


def _num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else str(float(v))
