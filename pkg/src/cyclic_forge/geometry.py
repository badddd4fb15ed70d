"""Numeric geometry of polygons inscribed in the unit circle.

Vertices are given by angular positions. Side ``i`` joins ``p[i-1]`` and
``p[i]`` (1-based, ``p[0]`` is ``p[2n]``). A side whose two endpoints coincide
(produced by merging adjacent vertices) is read as the tangent at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

TOL = 1e-9
PARALLEL_TOL = 1e-6
_NORM_TOL = 1e-12

Vec = tuple[float, float]


class GeometryError(ValueError):
    pass


class DegenerateVector(GeometryError):
    pass


class DegenerateSide(GeometryError):
    pass


class OddVertexCount(GeometryError):
    pass


class IndexOutOfRange(GeometryError, IndexError):
    pass


class ParallelSides(GeometryError):
    pass


def cross(u: Vec, v: Vec) -> float:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Vec, v: Vec) -> float:
    return u[0] * v[0] + u[1] * v[1]


def sub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def norm(u: Vec) -> float:
    return math.hypot(u[0], u[1])


def unit(u: Vec) -> Vec:
    r = norm(u)
    if r < _NORM_TOL:
        raise DegenerateVector(f"vector {u} has no direction")
    return (u[0] / r, u[1] / r)


def on_circle(t: float) -> Vec:
    return (math.cos(t), math.sin(t))


def directed_angle(u: Vec, v: Vec) -> float:
    """Counterclockwise angle taking ``u`` onto ``v``, in (-pi, pi]."""
    if norm(u) < _NORM_TOL or norm(v) < _NORM_TOL:
        raise DegenerateVector("directed angle of a zero vector")
    a = math.atan2(cross(u, v), dot(u, v))
    return math.pi if a <= -math.pi else a


def undirected_angle(u: Vec, v: Vec) -> float:
    """Non-reflex angle between two direction vectors, in [0, pi]."""
    return abs(math.atan2(cross(u, v), dot(u, v)))


def line_intersection(p: Vec, d: Vec, q: Vec, e: Vec) -> Vec:
    """Intersection of lines ``p + s d`` and ``q + t e``."""
    den = cross(d, e)
    if abs(den) < 1e-15:
        raise ParallelSides("lines are parallel")
    s = cross(sub(q, p), e) / den
    return (p[0] + s * d[0], p[1] + s * d[1])


@dataclass(frozen=True)
class SideLine:
    index: int
    start: Vec
    end: Vec
    direction: Vec
    tangent: bool = False


@dataclass(frozen=True)
class SidePairAngle:
    pair: tuple[int, int]
    intersection: Vec
    psi: float
    orientation_sign: int


@dataclass(frozen=True)
class CyclicPolygon:
    """Polygon on the unit circle with its position and side angles.

    ``theta[0] = 0`` and ``theta[i] = theta[i-1] + directed_angle(u[i-1], u[i])``;
    ``phi[i]`` (1-based, ``phi[0]`` unused and set to nan) is the half sum of
    ``theta[i-1]`` and ``theta[i]``.
    """

    positions: tuple[float, ...]
    vertices: tuple[Vec, ...]
    theta: tuple[float, ...]
    phi: tuple[float, ...]
    winding: int

    @property
    def size(self) -> int:
        return len(self.positions)

    def point(self, i: int) -> Vec:
        """Vertex ``p_i`` with ``p_0 = p_size``."""
        return self.vertices[(i - 1) % self.size]

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.size:
            raise IndexOutOfRange(f"side index {i} outside 1..{self.size}")

    def side(self, i: int) -> SideLine:
        self._check(i)
        a, b = self.point(i - 1), self.point(i)
        if norm(sub(b, a)) < TOL:
            # limit of a vanishing chord: the tangent, oriented counterclockwise
            return SideLine(i, a, b, (-b[1], b[0]), tangent=True)
        return SideLine(i, a, b, unit(sub(b, a)))

    def to_json(self) -> dict:
        return {"positions": list(self.positions), "winding": self.winding}


def build_polygon(positions: Sequence[float], allow_merged: bool = False) -> CyclicPolygon:
    """Compute theta, phi and the winding number for the given positions.

    With ``allow_merged`` consecutive equal positions are accepted (they give
    tangent sides); otherwise they raise :class:`DegenerateSide`.
    """
    positions = tuple(float(t) for t in positions)
    m = len(positions)
    if m % 2:
        raise OddVertexCount(f"{m} vertices; an even count is required")
    if m < 4:
        raise GeometryError("at least 4 vertices are required")
    verts = tuple(on_circle(t) for t in positions)
    theta = [0.0]
    for i in range(m):
        u, v = verts[i - 1], verts[i]
        if norm(sub(u, v)) < TOL:
            if not allow_merged:
                raise DegenerateSide(f"vertices {i} and {i + 1} coincide")
            step = 0.0
        else:
            step = directed_angle(u, v)
        theta.append(theta[-1] + step)
    winding = round(theta[-1] / (2 * math.pi))
    if abs(theta[-1] - 2 * math.pi * winding) >= TOL:
        raise GeometryError("theta does not close to a multiple of 2pi")
    phi = [math.nan] + [(theta[i] + theta[i - 1]) / 2 for i in range(1, m + 1)]
    return CyclicPolygon(positions, verts, tuple(theta), tuple(phi), winding)


def delta(poly: CyclicPolygon, i: int, j: int) -> float:
    """Directed gap ``phi_j - phi_i`` between sides ``i`` and ``j``."""
    poly._check(i)
    poly._check(j)
    return poly.phi[j] - poly.phi[i]


def _arm(q: Vec, primary: Vec, secondary: Vec, fallback: Vec) -> Vec:
    for target in (primary, secondary):
        d = sub(target, q)
        if norm(d) > 1e-7:
            return unit(d)
    return fallback


def side_pair_angle(poly: CyclicPolygon, i: int, j: int,
                    parallel_tol: float = PARALLEL_TOL) -> SidePairAngle:
    """Intersection ``q`` of lines ``L_i``, ``L_j`` and the angle ``p_{i-1} q p_j``.

    If ``q`` coincides with the named endpoint the other endpoint of that side
    is used instead; for a tangent side the arm follows the tangent direction.
    """
    li, lj = poly.side(i), poly.side(j)
    c = cross(li.direction, lj.direction)
    if abs(c) <= parallel_tol:
        raise ParallelSides(f"sides {i} and {j} are (nearly) parallel")
    q = line_intersection(li.start, li.direction, lj.start, lj.direction)
    wi, wj = li.direction, lj.direction
    arm_i = _arm(q, li.start, li.end, (-wi[0], -wi[1]))
    arm_j = _arm(q, lj.end, lj.start, wj)
    psi = undirected_angle(arm_i, arm_j)
    return SidePairAngle((i, j), q, psi, 1 if c > 0 else -1)


def winding_about_origin(points: Sequence[Vec]) -> int:
    """Winding number of the closed polyline around the origin (crossing count).

    Independent of :func:`build_polygon`; used to cross-check it.
    """
    w = 0
    m = len(points)
    for k in range(m):
        (x0, y0), (x1, y1) = points[k - 1], points[k]
        if y0 <= 0 < y1 and cross((x1 - x0, y1 - y0), (-x0, -y0)) > 0:
            w += 1
        elif y1 <= 0 < y0 and cross((x1 - x0, y1 - y0), (-x0, -y0)) < 0:
            w -= 1
    return w


def segments_cross(a: Vec, b: Vec, c: Vec, d: Vec) -> bool:
    """Proper crossing of segments ``ab`` and ``cd`` (shared endpoints excluded)."""
    d1 = cross(sub(b, a), sub(c, a))
    d2 = cross(sub(b, a), sub(d, a))
    d3 = cross(sub(d, c), sub(a, c))
    d4 = cross(sub(d, c), sub(b, c))
    return d1 * d2 < -1e-18 and d3 * d4 < -1e-18


def is_simple(points: Sequence[Vec]) -> bool:
    m = len(points)
    edges = [(points[k - 1], points[k]) for k in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if segments_cross(*edges[i], *edges[j]):
                return False
    return True


def random_positions(m: int, rng, winding: int | None = None, min_step: float = 1e-3) -> list[float]:
    """Random vertex positions for an ``m``-gon.

    With ``winding=None`` positions are independent and uniform, which gives
    self-intersecting polygons of assorted winding numbers. Otherwise the
    steps between consecutive vertices share one sign and add up to
    ``2 pi winding``; each step stays below pi so the winding number is
    exactly the one requested.
    """
    if winding is None:
        while True:
            pos = [rng.uniform(0, 2 * math.pi) for _ in range(m)]
            steps = [abs(directed_angle(on_circle(pos[k - 1]), on_circle(pos[k]))) for k in range(m)]
            if min(steps) > min_step and max(steps) < math.pi - min_step:
                return pos
    total = 2 * math.pi * abs(winding)
    if winding == 0 or total >= m * (math.pi - min_step):
        raise ValueError(f"an {m}-gon cannot wind {winding} times with steps below pi")
    sign = 1 if winding > 0 else -1
    while True:
        w = [rng.expovariate(1.0) for _ in range(m)]
        steps = [total * x / sum(w) for x in w]
        if min(steps) > min_step and max(steps) < math.pi - min_step:
            break
    pos = [rng.uniform(0, 2 * math.pi)]
    for s in steps[:-1]:
        pos.append(pos[-1] + sign * s)
    return pos
