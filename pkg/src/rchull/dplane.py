"""Directional (D-) convex hulls in the plane for arbitrary finite cones.

Works over any exact ordered field whose elements support ``+ - * /`` and
comparisons: ``Fraction`` for rational input, :class:`~rchull.fields.QSqrt3`
for the equilateral cone. Irrational directions outside Q(sqrt 3) are snapped
to rationals with :func:`snap`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Optional

from .exceptions import DegeneratePlane, EmptyInput, SingularSystem
from .fields import QSqrt3
from .geometry import (
    DirectionCone,
    PlanarPoint,
    TriPoint,
    convex_hull_2d,
    cross,
    in_convex_polygon,
    project,
    solve_linear,
)
from .planar import FaceUnion, PlanarGrid, _canon_edge, _canon_face, _dedupe, face_union, membership_2d

SNAP_TOL = 1e-9


def snap(value: float, tol: float = SNAP_TOL) -> Fraction:
    """Closest rational with denominator at most ``1/tol``."""
    return Fraction(value).limit_denominator(int(round(1 / tol)))


def _dot(d, p):
    return d[0] * p[0] + d[1] * p[1]


def _intersect(d1, c1, d2, c2):
    """Point ``v`` with ``d1 x v = c1`` and ``d2 x v = c2``."""
    det = cross(d1, d2)
    vx = (c1 * d2[0] - d1[0] * c2) / det
    vy = (c1 * d2[1] - d1[1] * c2) / det
    return PlanarPoint(vx, vy)


def _angle_ranks(cone: DirectionCone):
    dirs = []
    for k, d in enumerate(cone.directions):
        dirs.append(((k, 1), math.atan2(float(d[1]), float(d[0]))))
        dirs.append(((k, -1), math.atan2(-float(d[1]), -float(d[0]))))
    dirs.sort(key=lambda t: t[1])
    return {key: i for i, (key, _) in enumerate(dirs)}


def _trace_faces(vertices, edges, edge_dir, ranks):
    """Bounded faces of a connected planar straight-line graph, as CCW vertex cycles."""
    out = defaultdict(list)
    for (a, b), (k, s) in zip(edges, edge_dir):
        out[a].append((ranks[(k, s)], b))
        out[b].append((ranks[(k, -s)], a))
    order = {}
    for v, lst in out.items():
        lst.sort(key=lambda t: t[0])
        nbrs = [w for _, w in lst]
        order[v] = {w: i for i, w in enumerate(nbrs)}, nbrs
    seen = set()
    faces = []
    for a, b in edges:
        for u, v in ((a, b), (b, a)):
            if (u, v) in seen:
                continue
            cycle = []
            cu, cv = u, v
            while (cu, cv) not in seen:
                seen.add((cu, cv))
                cycle.append(cu)
                idx, nbrs = order[cv]
                i = idx[cu]
                nxt = nbrs[i - 1]
                cu, cv = cv, nxt
            area2 = sum(cross(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle)))
            if area2 > 0:
                faces.append(_canon_face(cycle))
    return faces


def build_dgrid(points, cone: DirectionCone, region=None) -> PlanarGrid:
    """D-grid of ``points``: the cone translated to every point.

    ``vertices`` and ``edges`` are restricted to ``region`` (a CCW convex
    polygon, default: the convex hull of the points); ``faces`` are the
    bounded cells of the full arrangement whose vertices all lie in it.
    """
    pts = _dedupe(points)
    if not pts:
        raise EmptyInput("build_dgrid needs at least one point")
    if len(cone) < 2:
        raise ValueError("a grid needs at least two directions")
    if region is None:
        region = convex_hull_2d(pts)
    dirs = cone.directions
    lines = sorted({(k, cross(d, p)) for p in pts for k, d in enumerate(dirs)}, key=lambda t: (t[0], t[1]))
    on_line = defaultdict(set)
    for i in range(len(lines)):
        k1, c1 = lines[i]
        for j in range(i + 1, len(lines)):
            k2, c2 = lines[j]
            if k1 == k2:
                continue
            v = _intersect(dirs[k1], c1, dirs[k2], c2)
            on_line[lines[i]].add(v)
            on_line[lines[j]].add(v)
    all_vertices = set()
    for vs in on_line.values():
        all_vertices |= vs
    inside = {v for v in all_vertices if in_convex_polygon(region, v)}
    full_edges, edge_dir = [], []
    for (k, c), vs in on_line.items():
        d = dirs[k]
        ordered = sorted(vs, key=lambda v: _dot(d, v))
        for a, b in zip(ordered, ordered[1:]):
            full_edges.append((a, b))
            edge_dir.append((k, 1))
    faces = _trace_faces(all_vertices, full_edges, edge_dir, _angle_ranks(cone)) if full_edges else []
    faces = [f for f in faces if all(v in inside for v in f)]
    edges = [_canon_edge(a, b) for a, b in full_edges if a in inside and b in inside]
    return PlanarGrid(cone, pts, tuple(lines), tuple(sorted(inside)), tuple(sorted(set(edges))), tuple(sorted(faces)))


def d_hull_2d(points, cone: DirectionCone) -> FaceUnion:
    """D-convex hull of planar points as a union of closed D-grid cells.

    A non-input vertex is removed when, for every cone direction, the
    surviving vertices on the line through it in that direction do not lie
    strictly on both sides. Rounds evaluate removability against the
    previous round's vertex set and stop when nothing is removed.
    """
    grid = build_dgrid(points, cone)
    K = set(grid.points)
    V = set(grid.vertices)
    dirs = cone.directions
    snapshots = [face_union(grid, V, 0)]
    rounds = 0
    while True:
        groups = defaultdict(list)
        for v in V:
            for k, d in enumerate(dirs):
                groups[(k, cross(d, v))].append(_dot(d, v))
        removable = []
        for v in sorted(V - K):
            keep = False
            for k, d in enumerate(dirs):
                t = _dot(d, v)
                ts = groups[(k, cross(d, v))]
                if any(s < t for s in ts) and any(s > t for s in ts):
                    keep = True
                    break
            if not keep:
                removable.append(v)
        if not removable:
            break
        V.difference_update(removable)
        rounds += 1
        snapshots.append(face_union(grid, V, rounds))
    return face_union(grid, V, rounds, snapshots)


# ---------------------------------------------------------------------------
# T3 configurations


@dataclass(frozen=True)
class T3Data:
    points: tuple  # K1, K2, K3 in configuration order
    base: PlanarPoint
    legs: tuple  # C1, C2, C3
    alphas: tuple
    inner: tuple  # P1, P2, P3
    directions: tuple  # direction of each leg


def detect_t3(points, cone: DirectionCone) -> Optional[T3Data]:
    """Find a (possibly degenerate) T3 configuration among three planar points.

    Tries every ordering of the points and every assignment of three distinct
    cone directions to the legs; each candidate is a linear solve in the
    base point, leg lengths and ``alpha_i * length_i``. Returns the first
    candidate with nonzero legs and all multipliers ``>= 1``.
    """
    pts = [PlanarPoint(*p) for p in points]
    if len(pts) != 3 or len(cone) < 3:
        return None
    dirs = cone.directions
    zero = pts[0][0] - pts[0][0]
    for order in permutations(range(3)):
        K1, K2, K3 = (pts[i] for i in order)
        for ks in permutations(range(len(dirs)), 3):
            d1, d2, d3 = (dirs[k] for k in ks)
            # unknowns: Px, Py, s1, s2, s3, u1, u2, u3
            A = []
            b = []
            for comp in (0, 1):
                row = [zero] * 8
                row[comp] = 1
                row[5] = d1[comp]
                A.append(row)
                b.append(K1[comp])
                row = [zero] * 8
                row[comp] = 1
                row[2] = d1[comp]
                row[6] = d2[comp]
                A.append(row)
                b.append(K2[comp])
                row = [zero] * 8
                row[comp] = 1
                row[2] = d1[comp]
                row[3] = d2[comp]
                row[7] = d3[comp]
                A.append(row)
                b.append(K3[comp])
                row = [zero] * 8
                row[2], row[3], row[4] = d1[comp], d2[comp], d3[comp]
                A.append(row)
                b.append(zero)
            try:
                sol = solve_linear(A, b)
            except SingularSystem:
                continue
            px, py, s1, s2, s3, u1, u2, u3 = sol
            if s1 == 0 or s2 == 0 or s3 == 0:
                continue
            alphas = (u1 / s1, u2 / s2, u3 / s3)
            if any(a < 1 for a in alphas):
                continue
            P = PlanarPoint(px, py)
            C = tuple(PlanarPoint(s * d[0], s * d[1]) for s, d in ((s1, d1), (s2, d2), (s3, d3)))
            P2 = PlanarPoint(P[0] + C[0][0], P[1] + C[0][1])
            P3 = PlanarPoint(P2[0] + C[1][0], P2[1] + C[1][1])
            return T3Data((K1, K2, K3), P, C, alphas, (P, P2, P3), (d1, d2, d3))
    return None


@dataclass(frozen=True)
class T3Hull:
    """Plane ``z = a*x + b*y + c`` intersected with the prism over the planar T3 hull."""

    t3: T3Data
    plane: tuple  # (a, b, c)
    planar_hull: FaceUnion
    points: tuple

    def height(self, x, y):
        a, b, c = self.plane
        return a * x + b * y + c

    def linear_form(self):
        """Coefficients ``(cx, cy, cz, c0)`` of ``H(x, y, z) = z - a x - b y - c``."""
        a, b, c = self.plane
        return (-a, -b, 1, -c)

    def contains(self, p) -> bool:
        return membership_2d(self.planar_hull, (p[0], p[1])) and p[2] == self.height(p[0], p[1])


def t3_hull_3d(points, cone: DirectionCone) -> T3Hull:
    """Hull of three lifted points whose projections form a T3."""
    pts = [TriPoint(*p) for p in points]
    proj = [project(p) for p in pts]
    t3 = detect_t3(proj, cone)
    if t3 is None:
        raise ValueError("projections do not form a T3 configuration for this cone")
    A = [[p.x, p.y, 1] for p in pts]
    try:
        a, b, c = solve_linear(A, [p.z for p in pts])
    except SingularSystem:
        raise DegeneratePlane("lifted points are collinear; the plane is not unique") from None
    return T3Hull(t3, (a, b, c), d_hull_2d(proj, cone), tuple(pts))


# ---------------------------------------------------------------------------
# grid refinement experiment


@dataclass(frozen=True)
class RefinementReport:
    """Outcome of :func:`refine_grid`.

    ``vertex_counts[0]`` is the initial grid; entry ``r`` is the count after
    refinement round ``r``.
    """

    vertex_counts: tuple
    terminated: bool
    rounds: int
    note: str = field(default="")
    budget_hit: bool = False


REFINEMENT_NOTE = (
    "Growth within max_rounds is empirical evidence of an infinite compatible grid, "
    "not a proof of non-termination."
)


def refine_grid(
    points,
    cone: DirectionCone,
    max_rounds: int = 25,
    region: Optional[FaceUnion] = None,
    max_vertices: Optional[int] = None,
) -> RefinementReport:
    """Repeatedly add the cone lines through newly found grid vertices.

    Only vertices inside the working region (the D-hull of the points unless
    given) count. Stops once a round yields no new vertex, after
    ``max_rounds`` rounds, or before starting a round once more than
    ``max_vertices`` vertices exist (``budget_hit``). Counts can grow
    geometrically, so the budget is what keeps non-terminating inputs at
    desk scale.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    pts = _dedupe(points)
    if not pts:
        raise EmptyInput("refine_grid needs at least one point")
    if region is None:
        region = d_hull_2d(pts, cone)
    hull_poly = convex_hull_2d(pts)

    def inside(v):
        return in_convex_polygon(hull_poly, v) and membership_2d(region, v)

    dirs = cone.directions
    lines = []
    line_set = set()
    vertices = set()

    def add_lines(new_lines):
        found = set()
        for L in new_lines:
            k1, c1 = L
            for M in lines:
                if M[0] == k1:
                    continue
                v = _intersect(dirs[k1], c1, dirs[M[0]], M[1])
                if v not in vertices and v not in found and inside(v):
                    found.add(v)
            lines.append(L)
        return found

    initial = sorted({(k, cross(d, p)) for p in pts for k, d in enumerate(dirs)}, key=lambda t: (t[0], t[1]))
    line_set.update(initial)
    fresh = add_lines(initial)
    vertices |= fresh
    counts = [len(vertices)]
    terminated = False
    rounds = 0
    budget_hit = False
    while rounds < max_rounds:
        if max_vertices is not None and len(vertices) > max_vertices:
            budget_hit = True
            break
        rounds += 1
        new_lines = []
        for v in sorted(fresh):
            for k, d in enumerate(dirs):
                L = (k, cross(d, v))
                if L not in line_set:
                    line_set.add(L)
                    new_lines.append(L)
        fresh = add_lines(new_lines)
        vertices |= fresh
        counts.append(len(vertices))
        if not fresh:
            terminated = True
            break
    note = "" if terminated else REFINEMENT_NOTE
    if budget_hit:
        note += f" Stopped after {rounds} rounds: more than {max_vertices} vertices."
    return RefinementReport(tuple(counts), terminated, rounds, note, budget_hit)


def parallelogram_60(a, b=1):
    """Vertices of the parallelogram with sides ``a`` (horizontal), ``b`` and a 60 degree angle.

    Coordinates live in Q(sqrt 3); ``a`` and ``b`` must be rational (snap
    irrational lengths first).
    """
    a, b = Fraction(a), Fraction(b)
    h = QSqrt3(0, b / 2)
    return [
        PlanarPoint(QSqrt3(0), QSqrt3(0)),
        PlanarPoint(QSqrt3(a), QSqrt3(0)),
        PlanarPoint(QSqrt3(b / 2), h),
        PlanarPoint(QSqrt3(a + b / 2), h),
    ]
