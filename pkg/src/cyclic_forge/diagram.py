"""Concrete diagrams: vertex placement, point merges, signatures and SVG.

A diagram places the 2n polygon vertices on circle *slots*. The
permutation says which slot each vertex occupies, so a non-identity
permutation draws the polygon through sides and diagonals of the convex
polygon on the slots. A merge sends one vertex onto another's slot; when the
two were adjacent the side between them shrinks to the tangent at the merged
point, which the drawing shows as the radius to that point.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Sequence

from .figure import CENTER, LETTERS, Figure, PointDef, center_point, circle_point, compute_coords, meet_point
from .geometry import (CyclicPolygon, Vec, build_polygon, cross, delta, dot, is_simple, norm, sub, unit)
from .pairings import Pairing, enumerate_orbits
from .proof import KNOWN_NAMES
from .theorem import TheoremStatement, delta_relation_direct, statement_from_measurements, verify_numeric

MAX_MERGES = 2
MERGE_EPS = 1e-4


class PlacementExhausted(RuntimeError):
    pass


class MergeDegenerate(ValueError):
    pass


class Rejected(ValueError):
    """A concrete placement violates one of the drawability thresholds."""


@dataclass(frozen=True)
class Thresholds:
    min_gap: float | None = None  # defaults to pi / (6n)
    min_cross: float = 0.1
    canvas: float = 3.0
    max_attempts: int = 1000

    def gap(self, n: int) -> float:
        return self.min_gap if self.min_gap is not None else math.pi / (6 * n)


@dataclass(frozen=True)
class DiagramSpec:
    """``permutation[i - 1]`` is the slot of vertex ``p_i``; merges are ``(keep, gone)`` vertex indices."""

    pairing: Pairing
    permutation: tuple[int, ...] | None = None
    merges: tuple[tuple[int, int], ...] = ()
    seed: int = 0

    def __post_init__(self):
        m = 2 * self.pairing.n
        perm = tuple(range(m)) if self.permutation is None else tuple(self.permutation)
        if sorted(perm) != list(range(m)):
            raise ValueError(f"{perm} is not a permutation of 0..{m - 1}")
        object.__setattr__(self, "permutation", perm)
        merges = tuple(tuple(mg) for mg in self.merges)
        if len(merges) > MAX_MERGES:
            raise MergeDegenerate(f"at most {MAX_MERGES} merges are supported")
        for keep, gone in merges:
            if keep == gone or not (1 <= keep <= m and 1 <= gone <= m):
                raise MergeDegenerate(f"bad merge ({keep}, {gone})")
        object.__setattr__(self, "merges", merges)

    @property
    def n(self) -> int:
        return self.pairing.n

    @property
    def identity(self) -> bool:
        return self.permutation == tuple(range(2 * self.n)) and not self.merges

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pairs": [list(p) for p in self.pairing.pairs],
            "permutation": list(self.permutation),
            "merges": [list(mg) for mg in self.merges],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiagramSpec":
        return cls(Pairing.of(data["pairs"]), tuple(data["permutation"]),
                   tuple(tuple(m) for m in data["merges"]), data["seed"])


@dataclass(frozen=True)
class Structure:
    """Combinatorial shape: slot of every vertex and the slot pair of every side.

    A side whose two endpoints share a slot is a tangent, written ``(s, s)``.
    """

    slots: int
    vertex_slots: tuple[int, ...]
    sides: tuple[tuple[int, int], ...]
    pairs: tuple[tuple[int, int], ...]

    def marked_items(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        return [tuple(sorted((self.sides[a - 1], self.sides[b - 1]))) for a, b in self.pairs]


def structure_of(spec: DiagramSpec) -> Structure:
    slots = list(spec.permutation)
    for keep, gone in spec.merges:
        sk, sg = slots[keep - 1], slots[gone - 1]
        if sk == sg:
            raise MergeDegenerate(f"vertices {keep} and {gone} already share a point")
        slots = [sk if s == sg else s for s in slots]
    remap = {s: k for k, s in enumerate(sorted(set(slots)))}
    slots = [remap[s] for s in slots]
    m = len(remap)
    if m < 3:
        raise MergeDegenerate(f"only {m} distinct points would remain")
    size = len(slots)
    sides = tuple(tuple(sorted((slots[(i - 2) % size], slots[i - 1]))) for i in range(1, size + 1))
    if len(set(sides)) < len(sides):
        raise MergeDegenerate("two sides collapse onto the same line")
    return Structure(m, tuple(slots), sides, spec.pairing.pairs)


def _image(s: int, m: int, k: int, reflect: bool) -> int:
    return (k - s) % m if reflect else (s + k) % m


def structure_signature(st: Structure) -> str:
    """Lexicographically smallest dihedral image of the side set and marked pairs."""
    m = st.slots
    best = None
    for k in range(m):
        for reflect in (False, True):
            def g(item):
                return tuple(sorted(_image(s, m, k, reflect) for s in item))
            sides = tuple(sorted(g(it) for it in st.sides))
            marks = tuple(sorted(tuple(sorted((g(a), g(b)))) for a, b in st.marked_items()))
            key = (sides, marks)
            if best is None or key < best:
                best = key
    return json.dumps({"m": m, "sides": best[0], "marks": best[1]}, separators=(",", ":"))


@dataclass(frozen=True)
class MarkedAngle:
    pair: tuple[int, int]
    vertex: str
    arms: tuple[str, str]  # (toward side a, toward side b)
    name: str
    value: float
    intersection: Vec
    meet: bool  # vertex is a constructed intersection point


@dataclass
class Diagram:
    spec: DiagramSpec
    structure: Structure
    positions: tuple[float, ...]  # one angular position per slot
    polygon: CyclicPolygon
    labels: tuple[str, ...]  # slot -> letter
    marked: list[MarkedAngle]
    statement: TheoremStatement
    figure: Figure
    center_used: bool
    auxiliary_segments: list[tuple[str, str]] = field(default_factory=list)

    def vertex_label(self, i: int) -> str:
        return self.labels[self.structure.vertex_slots[i - 1]]

    @property
    def givens(self) -> list[tuple[str, tuple[str, str, str]]]:
        """Marked angles as named knowns in statement order (left side first)."""
        by_pair = {mk.pair: mk for mk in self.marked}
        ordered = self.statement.lhs + self.statement.rhs
        out = []
        for var, term in zip(KNOWN_NAMES, ordered):
            mk = by_pair[term.pair]
            out.append((var, (mk.arms[0], mk.vertex, mk.arms[1])))
        return out

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "positions": list(self.positions),
            "labels": list(self.labels),
            "winding": self.polygon.winding,
            "center_used": self.center_used,
            "points": {k: list(v) for k, v in sorted(self.figure.coords.items())},
            "segments": ["".join(s) for s in self.figure.segments],
            "angles": [
                {"pair": list(mk.pair), "name": mk.name, "vertex": mk.vertex,
                 "degrees": math.degrees(mk.value)}
                for mk in self.marked
            ],
            "statement": self.statement.to_json(),
            "signature": diagram_signature(self),
        }


def diagram_signature(d: Diagram) -> str:
    return structure_signature(d.structure)


# -- realization ------------------------------------------------------------

def _side_points(item: tuple[int, int], labels: Sequence[str]) -> tuple[str, str]:
    a, b = item
    return (CENTER, labels[a]) if a == b else (labels[a], labels[b])


def realize(spec: DiagramSpec, positions: Sequence[float], th: Thresholds = Thresholds(),
            check: bool = True) -> Diagram:
    """Build the diagram for slot ``positions``; raise :class:`Rejected` on a threshold miss."""
    st = structure_of(spec)
    positions = tuple(float(t) for t in positions)
    if len(positions) != st.slots:
        raise ValueError(f"expected {st.slots} slot positions, got {len(positions)}")
    m = st.slots
    labels = tuple(LETTERS[:m])
    vertex_pos = [positions[s] for s in st.vertex_slots]
    poly = build_polygon(vertex_pos, allow_merged=True)
    if check:
        _check_positions(spec, st, positions, poly, th)

    defs: dict[str, PointDef] = {labels[k]: circle_point(k) for k in range(m)}
    defs[CENTER] = center_point()
    segments: list[tuple[str, str]] = []

    def add(s):
        if s[0] != s[1] and s not in segments and s[::-1] not in segments:
            segments.append(s)

    sides = [_side_points(it, labels) for it in st.sides]
    for s in sides:
        add(s)
    for k in range(m):
        add((labels[k], labels[(k + 1) % m]))
    center_used = any(a == b for a, b in st.sides)

    coords = compute_coords(defs, positions)
    next_letter = iter(LETTERS[m:])
    pending = []
    for a, b in st.pairs:
        la, lb = sides[a - 1], sides[b - 1]
        shared = set(la) & set(lb)
        if shared:
            (q,) = shared
            meet = False
        else:
            q = next(next_letter)
            defs[q] = meet_point(*la, *lb)
            meet = True
        pending.append(((a, b), q, la, lb, meet))
    coords = compute_coords(defs, positions)

    marked_spec = []
    aux = []
    for (a, b), q, la, lb, meet in pending:
        if check:
            drawn = (_direction(coords, la), _direction(coords, lb))
            ideal = (poly.side(a).direction, poly.side(b).direction)
            if min(abs(cross(*drawn)), abs(cross(*ideal))) < th.min_cross:
                raise Rejected(f"sides {a} and {b} are too close to parallel")
            if norm(coords[q]) > th.canvas:
                raise Rejected(f"intersection of sides {a} and {b} is off the canvas")
        if meet:
            for p in la + lb:
                seg = (q, p)
                aux.append(seg)
                add(seg)
        xa = _arm(q, la, first=True, labels=labels, st=st, side=a)
        xb = _arm(q, lb, first=False, labels=labels, st=st, side=b)
        marked_spec.append(((a, b), q, xa, xb, meet))

    fig = Figure(defs, positions, tuple(segments))
    marked = []
    for pair, q, xa, xb, meet in marked_spec:
        ang = fig.require_angle(xa, q, xb)
        marked.append(MarkedAngle(pair, q, (xa, xb), ang.name, ang.value, fig.coords[q], meet))

    drel = delta_relation_direct(spec.pairing, poly.winding)
    measured = {mk.pair: (delta(poly, *mk.pair), mk.value) for mk in marked}
    names = {mk.pair: "∠" + mk.name for mk in marked}
    statement = statement_from_measurements(drel, poly.winding, measured, names)
    d = Diagram(spec, st, positions, poly, labels, marked, statement, fig, center_used, aux)
    if check:
        if verify_numeric(poly, spec.pairing) >= 1e-9:
            raise Rejected("delta relation does not close on this placement")
        if statement.residual({("∠" + mk.name): mk.value for mk in marked}) >= 1e-9:
            raise Rejected("angle statement does not hold on this placement")
    return d


def _direction(coords, line: tuple[str, str]) -> Vec:
    return unit(sub(coords[line[1]], coords[line[0]]))


def _arm(q: str, line: tuple[str, str], first: bool, labels, st: Structure, side: int) -> str:
    """Point marking the arm along ``line`` at ``q``.

    The arm on the first side heads toward the side's start vertex, the one on
    the second side toward its end vertex; if that is ``q`` itself the other
    endpoint is used. A tangent's arm runs along the radius.
    """
    size = len(st.vertex_slots)
    start = labels[st.vertex_slots[(side - 2) % size]]
    end = labels[st.vertex_slots[side - 1]]
    if line[0] == CENTER:
        return CENTER if q == line[1] else line[1]
    primary, secondary = (start, end) if first else (end, start)
    return secondary if primary == q else primary


def _check_positions(spec: DiagramSpec, st: Structure, positions, poly: CyclicPolygon, th: Thresholds) -> None:
    m = len(positions)
    order = sorted(t % (2 * math.pi) for t in positions)
    gaps = [(order[(k + 1) % m] - order[k]) % (2 * math.pi) for k in range(m)]
    if min(gaps) < th.gap(spec.n):
        raise Rejected("two points are closer than the minimum gap")
    if spec.identity:
        if poly.winding != 1 or not is_simple(poly.vertices):
            raise Rejected("identity polygon must be simple with winding one")


def _sample_positions(m: int, gap: float, rng: random.Random) -> list[float]:
    """Slots in counterclockwise order with every gap at least ``gap``."""
    free = 2 * math.pi - m * gap
    if free <= 0:
        raise PlacementExhausted(f"{m} points cannot keep a gap of {gap}")
    weights = [rng.expovariate(1.0) for _ in range(m)]
    total = sum(weights)
    t = rng.uniform(0, 2 * math.pi)
    out = []
    for w in weights:
        out.append(t)
        t += gap + free * w / total
    return out


def place_vertices(spec: DiagramSpec, th: Thresholds = Thresholds()) -> Diagram:
    """Rejection-sample slot positions until every threshold holds."""
    st = structure_of(spec)
    rng = random.Random(f"place:{spec.seed}")
    last = None
    for _ in range(th.max_attempts):
        positions = _sample_positions(st.slots, th.gap(spec.n), rng)
        try:
            return realize(spec, positions, th)
        except (Rejected, ValueError) as exc:
            if isinstance(exc, MergeDegenerate):
                raise
            last = exc
    raise PlacementExhausted(f"no placement after {th.max_attempts} attempts "
                             f"(seed {spec.seed}; last rejection: {last})")


def _vertex_index(d: Diagram, v) -> int:
    if isinstance(v, int):
        return v
    slot = d.labels.index(v)
    return d.structure.vertex_slots.index(slot) + 1


def merge_points(d: Diagram, v1, v2, th: Thresholds = Thresholds()) -> Diagram:
    """Merge vertex ``v1`` into ``v2`` (1-based indices or letters).

    The remaining points keep their positions when that still satisfies the
    thresholds; otherwise the merged shape is placed afresh.
    """
    gone, keep = _vertex_index(d, v1), _vertex_index(d, v2)
    if gone == keep:
        raise MergeDegenerate("cannot merge a vertex with itself")
    spec = replace(d.spec, merges=d.spec.merges + ((keep, gone),))
    new = structure_of(spec)
    # surviving old slots, in order, carry their positions over
    old_slots = d.structure.vertex_slots
    positions = [None] * new.slots
    for i, s in enumerate(new.vertex_slots):
        positions[s] = d.positions[old_slots[i]] if old_slots[i] != old_slots[gone - 1] else d.positions[old_slots[keep - 1]]
    try:
        return realize(spec, positions, th)
    except Rejected:
        return place_vertices(spec, th)


def limit_polygon(d: Diagram, eps: float = MERGE_EPS) -> CyclicPolygon:
    """Unmerged polygon with each merged-away vertex ``eps`` past its survivor."""
    spec = d.spec
    offsets = [0.0] * (2 * spec.n)
    for keep, gone in spec.merges:
        offsets[gone - 1] += eps
    pos = [d.positions[s] + off for s, off in zip(d.structure.vertex_slots, offsets)]
    return build_polygon(pos)


def limit_deviation(d: Diagram, eps: float = MERGE_EPS) -> float:
    """Largest gap between each pair's delta on the unmerged limit polygon and
    the delta implied by the merged diagram's marked angle and its offset."""
    limit = limit_polygon(d, eps)
    st = d.statement
    worst = 0.0
    for mk in d.marked:
        c, s = st.offsets[mk.pair], st.orientation_signs[mk.pair]
        predicted = c * math.pi / 2 - s * mk.value
        worst = max(worst, abs(predicted - delta(limit, *mk.pair)))
    return worst


# -- collections --------------------------------------------------------------

def hexagon_specs() -> list[DiagramSpec]:
    """Every pairing class of the hexagon under every vertex permutation."""
    return [DiagramSpec(o.canonical, perm) for o in enumerate_orbits(3) for perm in permutations(range(6))]


def pentagon_specs() -> list[DiagramSpec]:
    """Hexagon specs with each unordered pair of vertices merged."""
    out = []
    for spec in hexagon_specs():
        for keep in range(1, 7):
            for gone in range(keep + 1, 7):
                out.append(replace(spec, merges=((keep, gone),)))
    return out


def dedupe(specs: Sequence[DiagramSpec]) -> list[tuple[str, DiagramSpec]]:
    """First spec of each signature class, in sweep order; degenerate merges skipped."""
    seen: dict[str, DiagramSpec] = {}
    for spec in specs:
        try:
            sig = structure_signature(structure_of(spec))
        except MergeDegenerate:
            continue
        seen.setdefault(sig, spec)
    return list(seen.items())


def collection_specs(shape: str) -> list[tuple[str, DiagramSpec]]:
    if shape == "hexagon":
        return dedupe(hexagon_specs())
    if shape == "pentagon":
        return dedupe(pentagon_specs())
    raise ValueError(f"unknown shape {shape!r}")


# -- SVG --------------------------------------------------------------------

SCALE = 100.0


def _xy(p: Vec) -> tuple[float, float]:
    return (round(p[0] * SCALE, 3), round(-p[1] * SCALE, 3))


def _line(cls: str, a: Vec, b: Vec) -> str:
    (x1, y1), (x2, y2) = _xy(a), _xy(b)
    return f'<line class="{cls}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>'


def _arc(q: Vec, u: Vec, v: Vec, r: float) -> str:
    start = (q[0] + r * u[0], q[1] + r * u[1])
    end = (q[0] + r * v[0], q[1] + r * v[1])
    sweep = 0 if cross(u, v) > 0 else 1  # y is flipped in SVG
    (x1, y1), (x2, y2) = _xy(start), _xy(end)
    rr = round(r * SCALE, 3)
    return f'<path class="angle-arc" d="M {x1} {y1} A {rr} {rr} 0 0 {sweep} {x2} {y2}"/>'


def render_svg(d: Diagram) -> str:
    """SVG document: circle, sides, extensions to intersections, angle marks, labels."""
    coords = d.figure.coords
    reach = max([1.0] + [norm(p) for p in coords.values()]) + 0.25
    half = round(reach * SCALE, 3)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{-half} {-half} {2 * half} {2 * half}">',
        "<style>line{stroke:black;stroke-width:1}.hull{stroke:#999}.extension{stroke-dasharray:4 3}"
        ".radius{stroke:#555}.angle-arc{fill:none;stroke:#c00}text{font-family:sans-serif;font-size:9px}"
        ".angle-label{fill:#c00}</style>",
        f'<circle class="circumcircle" cx="0" cy="0" r="{SCALE}" fill="none" stroke="black"/>',
    ]
    labels = d.labels
    side_lines = {tuple(sorted(_side_points(it, labels))) for it in d.structure.sides}
    for a, b in sorted(side_lines):
        cls = "radius" if CENTER in (a, b) else "side"
        out.append(_line(cls, coords[a], coords[b]))
    m = d.structure.slots
    for k in range(m):
        seg = tuple(sorted((labels[k], labels[(k + 1) % m])))
        if seg not in side_lines:
            out.append(_line("hull", coords[seg[0]], coords[seg[1]]))
    for mk in d.marked:
        if not mk.meet:
            continue
        q = coords[mk.vertex]
        a, b = mk.pair
        for it in (d.structure.sides[a - 1], d.structure.sides[b - 1]):
            p1, p2 = _side_points(it, labels)
            c1, c2 = coords[p1], coords[p2]
            t = dot(sub(q, c1), sub(c2, c1)) / dot(sub(c2, c1), sub(c2, c1))
            if t < 0:
                out.append(_line("extension", q, c1))
            elif t > 1:
                out.append(_line("extension", c2, q))
    names = {t.pair: var for var, t in zip(KNOWN_NAMES, d.statement.lhs + d.statement.rhs)}
    for mk in d.marked:
        q = coords[mk.vertex]
        u = unit(sub(coords[mk.arms[0]], q))
        v = unit(sub(coords[mk.arms[1]], q))
        r = 0.12
        out.append(_arc(q, u, v, r))
        bis = (u[0] + v[0], u[1] + v[1])
        bis = unit(bis) if norm(bis) > 1e-9 else (-u[1], u[0])
        lx, ly = _xy((q[0] + 0.22 * bis[0], q[1] + 0.22 * bis[1]))
        out.append(f'<text class="angle-label" x="{lx}" y="{ly}" text-anchor="middle">{names[mk.pair]}</text>')
    shown = list(labels) + [mk.vertex for mk in d.marked if mk.meet]
    if d.center_used or any(mk.vertex == CENTER for mk in d.marked):
        shown.append(CENTER)
    for name in sorted(set(shown)):
        p = coords[name]
        r = norm(p)
        off = (p[0] / r * 0.1, p[1] / r * 0.1) if r > 1e-9 else (0.05, -0.1)
        x, y = _xy((p[0] + off[0], p[1] + off[1]))
        out.append(f'<text class="point-label" x="{x}" y="{y}" text-anchor="middle">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
