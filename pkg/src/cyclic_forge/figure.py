"""Points, drawn lines and the angles they make.

A :class:`Figure` is built from point constructions (circle points given by
angular positions, the center, intersections of two lines through named
points) and a set of drawn segments. Segments are grouped into lines; the
rays leaving a point along those lines determine which angles exist. An
angle is only available when both of its arms run along drawn lines.

All incidence tests are numeric with tolerance ``1e-9``; afterwards they are
treated as exact combinatorial facts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .geometry import Vec, cross, dot, line_intersection, norm, on_circle, sub, undirected_angle, unit

INCIDENCE_TOL = 1e-9
LETTERS = [c for c in "ABCDEFGHIJKLMNPQRSTUVWXYZ"]
CENTER = "O"


@dataclass(frozen=True)
class PointDef:
    kind: str  # "circle", "center" or "meet"
    slot: int = -1
    args: tuple[str, ...] = ()


def circle_point(slot: int) -> PointDef:
    return PointDef("circle", slot)


def center_point() -> PointDef:
    return PointDef("center")


def meet_point(a: str, b: str, c: str, d: str) -> PointDef:
    """Intersection of line ``ab`` with line ``cd``."""
    return PointDef("meet", args=(a, b, c, d))


def compute_coords(defs: Mapping[str, PointDef], positions: Sequence[float]) -> dict[str, Vec]:
    coords: dict[str, Vec] = {}
    pending = dict(defs)
    while pending:
        progressed = False
        for name, d in list(pending.items()):
            if d.kind == "circle":
                coords[name] = on_circle(positions[d.slot])
            elif d.kind == "center":
                coords[name] = (0.0, 0.0)
            elif all(a in coords for a in d.args):
                a, b, c, e = (coords[x] for x in d.args)
                coords[name] = line_intersection(a, sub(b, a), c, sub(e, c))
            else:
                continue
            del pending[name]
            progressed = True
        if not progressed:
            raise ValueError(f"unresolvable point constructions: {sorted(pending)}")
    return coords


@dataclass(frozen=True)
class Line:
    index: int
    points: tuple[str, ...]  # sorted along the line direction
    direction: Vec
    implicit: bool


@dataclass(frozen=True)
class Ray:
    vertex: str
    line: int
    side: int
    points: tuple[str, ...]  # nearest first

    @property
    def key(self) -> tuple[int, int]:
        return (self.line, self.side)


@dataclass(frozen=True)
class Angle:
    """Non-reflex angle at ``vertex`` between two rays on different lines."""

    id: int
    vertex: str
    rays: tuple[Ray, Ray]
    value: float

    @property
    def arms(self) -> tuple[str, str]:
        return tuple(sorted((self.rays[0].points[0], self.rays[1].points[0])))

    @property
    def name(self) -> str:
        a, b = self.arms
        return f"{a}{self.vertex}{b}"


@dataclass
class Figure:
    defs: dict[str, PointDef]
    positions: tuple[float, ...]
    segments: tuple[tuple[str, str], ...]
    implicit_radii: bool = True

    @cached_property
    def coords(self) -> dict[str, Vec]:
        return compute_coords(self.defs, self.positions)

    @property
    def circle_points(self) -> list[str]:
        return sorted((n for n, d in self.defs.items() if d.kind == "circle"),
                      key=lambda n: self.defs[n].slot)

    @property
    def center(self) -> str | None:
        return next((n for n, d in self.defs.items() if d.kind == "center"), None)

    def with_segments(self, extra: Iterable[tuple[str, str]]) -> "Figure":
        segs = list(self.segments)
        for s in extra:
            if s not in segs and s[::-1] not in segs:
                segs.append(s)
        return Figure(self.defs, self.positions, tuple(segs), self.implicit_radii)

    # -- lines ------------------------------------------------------------
    def _collinear(self, a: str, b: str, c: str) -> bool:
        p, q, r = self.coords[a], self.coords[b], self.coords[c]
        d = sub(q, p)
        return abs(cross(unit(d), sub(r, p))) < INCIDENCE_TOL * max(1.0, norm(d))

    @cached_property
    def lines(self) -> list[Line]:
        drawn = [(tuple(s), False) for s in self.segments]
        c = self.center
        if self.implicit_radii and c is not None:
            drawn += [((c, p), True) for p in self.circle_points]
        groups: list[list] = []  # [points, implicit]
        for (a, b), implicit in drawn:
            for group in groups:
                p, q = sorted(group[0])[:2]
                if self._collinear(p, q, a) and self._collinear(p, q, b):
                    group[0].update((a, b))
                    group[1] = group[1] and implicit
                    break
            else:
                groups.append([{a, b}, implicit])
        out = []
        names = sorted(self.coords)
        for idx, (pts, implicit) in enumerate(groups):
            pts = set(pts)
            a, b = sorted(pts)[:2]
            for x in names:
                if x not in pts and self._collinear(a, b, x):
                    pts.add(x)
            first = sorted(pts)[0]
            direction = unit(sub(self.coords[sorted(pts)[1]], self.coords[first]))
            origin = self.coords[first]
            ordered = tuple(sorted(pts, key=lambda x: dot(sub(self.coords[x], origin), direction)))
            out.append(Line(idx, ordered, direction, implicit))
        return out

    @cached_property
    def lines_through(self) -> dict[str, list[Line]]:
        table: dict[str, list[Line]] = {p: [] for p in self.coords}
        for line in self.lines:
            for p in line.points:
                table[p].append(line)
        return table

    def line_of(self, a: str, b: str) -> Line | None:
        for line in self.lines_through.get(a, ()):
            if b in line.points:
                return line
        return None

    def connected(self, a: str, b: str) -> bool:
        return self.line_of(a, b) is not None

    # -- rays and angles -------------------------------------------------
    @cached_property
    def rays(self) -> dict[str, list[Ray]]:
        out: dict[str, list[Ray]] = {}
        for v, lines in self.lines_through.items():
            rays = []
            pv = self.coords[v]
            for line in lines:
                for side in (1, -1):
                    pts = [p for p in line.points if p != v
                           and side * dot(sub(self.coords[p], pv), line.direction) > 0]
                    if pts:
                        pts.sort(key=lambda p: norm(sub(self.coords[p], pv)))
                        rays.append(Ray(v, line.index, side, tuple(pts)))
            out[v] = rays
        return out

    def ray_toward(self, v: str, p: str) -> Ray | None:
        for r in self.rays.get(v, ()):
            if p in r.points:
                return r
        return None

    def ray_vector(self, r: Ray) -> Vec:
        d = self.lines[r.line].direction
        return (r.side * d[0], r.side * d[1])

    @cached_property
    def angles(self) -> list[Angle]:
        out = []
        for v in sorted(self.rays):
            for r1, r2 in combinations(sorted(self.rays[v], key=lambda r: r.key), 2):
                if r1.line == r2.line:
                    continue
                value = undirected_angle(self.ray_vector(r1), self.ray_vector(r2))
                out.append(Angle(len(out), v, (r1, r2), value))
        return out

    @cached_property
    def angle_index(self) -> dict[tuple[str, tuple[int, int], tuple[int, int]], Angle]:
        return {(a.vertex, a.rays[0].key, a.rays[1].key): a for a in self.angles}

    def angle_between(self, v: str, r1: Ray, r2: Ray) -> Angle | None:
        k1, k2 = sorted((r1.key, r2.key))
        return self.angle_index.get((v, k1, k2))

    def angle(self, x: str, v: str, y: str) -> Angle | None:
        """The angle ``xvy`` if both arms are drawn."""
        r1, r2 = self.ray_toward(v, x), self.ray_toward(v, y)
        if r1 is None or r2 is None or r1.line == r2.line:
            return None
        return self.angle_between(v, r1, r2)

    def require_angle(self, x: str, v: str, y: str) -> Angle:
        a = self.angle(x, v, y)
        if a is None:
            raise KeyError(f"angle {x}{v}{y} is not available in this figure")
        return a

    @cached_property
    def angle_by_name(self) -> dict[str, Angle]:
        return {a.name: a for a in self.angles}


def measure(coords: Mapping[str, Vec], x: str, v: str, y: str) -> float:
    pv = coords[v]
    return undirected_angle(sub(coords[x], pv), sub(coords[y], pv))


def affine_form(fig: Figure, x: str, v: str, y: str, h: float = 1e-5):
    """Exact affine dependence of angle ``xvy`` on the circle positions.

    Returns ``(coeffs, pi_const)``: coefficients (multiples of 1/2) on each
    position parameter and a multiple of pi/2 such that the angle equals
    ``sum(c_k t_k) + pi_const * pi`` near the current configuration.
    """
    from fractions import Fraction

    base = list(fig.positions)
    f0 = measure(fig.coords, x, v, y)
    coeffs = []
    for k in range(len(base)):
        vals = []
        for s in (1, -1):
            t = base[:]
            t[k] += s * h
            vals.append(measure(compute_coords(fig.defs, t), x, v, y))
        d = (vals[0] - vals[1]) / (2 * h)
        c = Fraction(round(2 * d), 2)
        if abs(d - float(c)) > 1e-3:
            raise ValueError(f"angle {x}{v}{y} is not affine in the positions (slope {d})")
        coeffs.append(c)
    rest = f0 - sum(float(c) * t for c, t in zip(coeffs, base))
    k = round(rest / (math.pi / 2))
    if abs(rest - k * math.pi / 2) > 1e-6:
        raise ValueError(f"angle {x}{v}{y} has a non half-pi constant part {rest}")
    return coeffs, Fraction(k, 2)
