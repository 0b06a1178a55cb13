"""Separately convex hulls of finite planar point sets by grid-vertex pruning.

The grid of a point set is the arrangement of horizontal and vertical lines
through its points. The hull is a finite union of closed grid cells; it is
found by repeatedly deleting non-input vertices that have surviving vertices
on at most one side along both of their grid lines.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .exceptions import EmptyInput
from .geometry import (
    AXIS_CONE,
    DirectionCone,
    PlanarPoint,
    cross,
    in_convex_polygon,
    on_segment,
    orient,
)


def _canon_edge(a, b):
    return (a, b) if a <= b else (b, a)


def _canon_face(vertices):
    """Rotate a CCW vertex cycle so that it starts at its smallest vertex."""
    vs = list(vertices)
    i = vs.index(min(vs))
    return tuple(vs[i:] + vs[:i])


@dataclass(frozen=True)
class PlanarGrid:
    """Line arrangement of a point set with respect to a direction cone.

    ``lines`` holds ``(direction index, offset)`` pairs, where the offset is
    the value of the cross product ``d x p`` shared by every point ``p`` on
    the line. ``faces`` are bounded cells as CCW vertex cycles.
    """

    cone: DirectionCone
    points: tuple
    lines: tuple
    vertices: tuple
    edges: tuple
    faces: tuple

    @property
    def n_vertices(self):
        return len(self.vertices)


@dataclass(frozen=True)
class FaceUnion:
    """Closed union of grid cells: kept vertices, kept edges, kept faces.

    ``generation`` is the index ``i`` of the pruning snapshot ``B_i``; the
    final hull also carries every snapshot in ``snapshots`` (B_0 first).
    """

    vertices: frozenset
    edges: frozenset
    faces: frozenset
    generation: int = 0
    points: tuple = ()
    cone: DirectionCone = AXIS_CONE
    snapshots: tuple = field(default=(), compare=False, repr=False)

    @property
    def rounds(self) -> int:
        return self.generation

    def cells(self):
        """Kept cells as a comparable triple of frozensets."""
        return (self.vertices, self.edges, self.faces)

    def __contains__(self, p) -> bool:
        return membership_2d(self, p)

    def boundary_polygons(self):
        """Boundary cycles of the union of kept 2-cells, with collinear vertices removed."""
        directed = set()
        for f in self.faces:
            n = len(f)
            for i in range(n):
                directed.add((f[i], f[(i + 1) % n]))
        boundary = [(u, v) for (u, v) in directed if (v, u) not in directed]
        nxt = defaultdict(list)
        for u, v in boundary:
            nxt[u].append(v)
        used = set()
        loops = []
        for start in sorted(boundary):
            if start in used:
                continue
            loop = [start[0]]
            u, v = start
            used.add(start)
            while v != loop[0]:
                loop.append(v)
                cand = [w for w in sorted(nxt[v]) if (v, w) not in used]
                if not cand:
                    break
                used.add((v, cand[0]))
                v = cand[0]
            loops.append(_drop_collinear(loop))
        return loops

    def maximal_segments(self):
        """Maximal runs of kept edges along a single line, as sorted endpoint pairs."""
        by_line = defaultdict(list)
        for a, b in self.edges:
            d = (b[0] - a[0], b[1] - a[1])
            key = (_direction_key(d), cross(_direction_key(d), a))
            by_line[key].append((a, b))
        segments = []
        for key, edges in by_line.items():
            # union of intervals along the line
            edges = sorted(edges)
            cur_a, cur_b = edges[0]
            for a, b in edges[1:]:
                if a == cur_b:
                    cur_b = b
                else:
                    segments.append((cur_a, cur_b))
                    cur_a, cur_b = a, b
            segments.append((cur_a, cur_b))
        return sorted(segments)

    def isolated_vertices(self):
        on_edge = set()
        for a, b in self.edges:
            on_edge.add(a)
            on_edge.add(b)
        return sorted(v for v in self.vertices if v not in on_edge)

    def bounding_box(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), max(xs)), (min(ys), max(ys))

    def interval_on_line(self, p, axis: str):
        """Interval of this (separately convex) set on the axis line through ``p``.

        Returns ``(lo, hi)`` along the free coordinate, or ``None`` when ``p``
        is outside. ``axis`` is the free coordinate: ``"x"`` for the horizontal
        line through ``p``.
        """
        if not membership_2d(self, p):
            return None
        free = 0 if axis == "x" else 1
        return self._connected_piece(p, free)

    def _connected_piece(self, p, free):
        fixed = 1 - free
        c = p[fixed]
        pieces = []
        for v in self.vertices:
            if v[fixed] == c:
                pieces.append((v[free], v[free]))
        for a, b in self.edges:
            if a[fixed] == c and b[fixed] == c:
                pieces.append(tuple(sorted((a[free], b[free]))))
        for f in self.faces:
            cys = [v[fixed] for v in f]
            if min(cys) <= c <= max(cys):
                fs = [v[free] for v in f]
                pieces.append((min(fs), max(fs)))
        pieces.sort()
        merged = []
        for a, b in pieces:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        for a, b in merged:
            if a <= p[free] <= b:
                return (a, b)
        return (p[free], p[free])


def _direction_key(d):
    dx, dy = d
    lead = dx if dx != 0 else dy
    return (dx / lead, dy / lead)


def _drop_collinear(loop):
    out = []
    n = len(loop)
    for i in range(n):
        a, b, c = loop[i - 1], loop[i], loop[(i + 1) % n]
        if orient(a, b, c) != 0:
            out.append(b)
    return out


def _dedupe(points: Iterable) -> tuple:
    seen = []
    for p in points:
        p = PlanarPoint(*p)
        if p not in seen:
            seen.append(p)
    return tuple(seen)


def build_grid(points, cone: DirectionCone = AXIS_CONE) -> PlanarGrid:
    """Grid of ``points`` for ``cone``.

    For the two-axis cone this is the full product grid of the distinct
    coordinates. Other cones are delegated to :func:`rchull.dplane.build_dgrid`.
    """
    pts = _dedupe(points)
    if not pts:
        raise EmptyInput("build_grid needs at least one point")
    if len(cone) < 2:
        raise ValueError("a grid needs at least two directions")
    if not cone.is_axis:
        from .dplane import build_dgrid

        return build_dgrid(pts, cone)
    xs = sorted({p.x for p in pts})
    ys = sorted({p.y for p in pts})
    h, v = cone.directions.index((1, 0)), cone.directions.index((0, 1))
    # offset = d x p: y for the horizontal direction, -x for the vertical one
    lines = tuple([(h, y) for y in ys] + [(v, -x) for x in xs])
    vertices = tuple(PlanarPoint(x, y) for x in xs for y in ys)
    edges = []
    for y in ys:
        for x0, x1 in zip(xs, xs[1:]):
            edges.append((PlanarPoint(x0, y), PlanarPoint(x1, y)))
    for x in xs:
        for y0, y1 in zip(ys, ys[1:]):
            edges.append((PlanarPoint(x, y0), PlanarPoint(x, y1)))
    faces = []
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            faces.append(
                _canon_face(
                    [PlanarPoint(x0, y0), PlanarPoint(x1, y0), PlanarPoint(x1, y1), PlanarPoint(x0, y1)]
                )
            )
    return PlanarGrid(cone, pts, lines, vertices, tuple(edges), tuple(faces))


def face_union(grid: PlanarGrid, kept, generation=0, snapshots=()) -> FaceUnion:
    """Union of the closed grid cells all of whose vertices are in ``kept``."""
    kept = frozenset(kept)
    edges = frozenset(_canon_edge(a, b) for a, b in grid.edges if a in kept and b in kept)
    faces = frozenset(f for f in grid.faces if all(v in kept for v in f))
    return FaceUnion(kept, edges, faces, generation, grid.points, grid.cone, tuple(snapshots))


def _one_sided(v, line_members) -> bool:
    below = above = False
    for t in line_members:
        if t < v:
            below = True
        elif t > v:
            above = True
        if below and above:
            return False
    return True


def separate_hull(points) -> FaceUnion:
    """Separately convex hull of planar points (two-axis cone).

    Each round removes, against the previous round's vertex set, every
    non-input vertex whose horizontal and vertical grid lines both carry
    surviving vertices on at most one side. Stops at the first round that
    removes nothing. The returned hull's ``snapshots`` are ``B_0 .. B_final``
    and its ``generation`` is the number of rounds that removed vertices.
    """
    grid = build_grid(points, AXIS_CONE)
    K = set(grid.points)
    V = set(grid.vertices)
    snapshots = [face_union(grid, V, 0)]
    rounds = 0
    while True:
        rows = defaultdict(list)
        cols = defaultdict(list)
        for v in V:
            rows[v.y].append(v.x)
            cols[v.x].append(v.y)
        removable = [
            v
            for v in sorted(V - K)
            if _one_sided(v.x, rows[v.y]) and _one_sided(v.y, cols[v.x])
        ]
        if not removable:
            break
        V.difference_update(removable)
        rounds += 1
        snapshots.append(face_union(grid, V, rounds))
    return face_union(grid, V, rounds, snapshots)


def membership_2d(hull: FaceUnion, p) -> bool:
    """True iff ``p`` lies in a kept closed vertex, edge or face."""
    p = tuple(p)
    if p in hull.vertices:
        return True
    for a, b in hull.edges:
        if on_segment(a, b, p):
            return True
    for f in hull.faces:
        if in_convex_polygon(f, p):
            return True
    return False
