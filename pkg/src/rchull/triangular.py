"""Rank-one convex hulls of finite sets of upper-triangular 2x2 matrices.

The hull projects onto the separately convex hull of the projected points
and is cut out vertically by ruled quadrics over the grid rectangles. The
heights at the grid vertices drive everything: an inner pass iterates
rank-one segments and T4 lifts restricted to grid vertices until no exact
bound moves, an outer pass reads the same heights off the discretized
rank-one convex envelope, and the description is accepted where the two
agree.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .envelope import MEMBERSHIP_C, Grid3, membership_threshold, multilevel_envelope, outer_heights
from .exceptions import EmptyInput, OutsidePlanarHull, SingularSystem, UnresolvedHeights
from .geometry import PlanarPoint, Poly, Quadric, TriPoint, format_scalar, on_segment, to_scalar, tri
from .planar import FaceUnion, separate_hull
from .t4 import detect_t4, fit_quadric, height_operator

INPUT, T4_LIFT, SEGMENT, UNRESOLVED = "input", "t4", "segment", "unresolved"


@dataclass(frozen=True)
class HullOptions:
    """Knobs for :func:`compute_hull`.

    ``reconcile_tol`` defaults to two oracle grid spacings and ``oracle_tol``
    (the sweep residual at which the envelope stops) to a fiftieth of the
    membership threshold.
    """

    M: Optional[object] = None
    max_rounds: int = 50
    reconcile_tol: Optional[float] = None
    oracle_resolution: tuple = (60, 60, 60)
    oracle_tol: Optional[float] = None
    membership_c: float = MEMBERSHIP_C
    max_sweeps: int = 100
    threads: int = 1
    t4_budget: int = 20000
    check_outer: bool = True

    def __post_init__(self):
        if self.max_rounds < 1 or self.t4_budget < 1 or self.max_sweeps < 1:
            raise ValueError("round, sweep and T4 caps must be positive")
        if self.reconcile_tol is not None and self.reconcile_tol < 0:
            raise ValueError("reconcile_tol must be non-negative")
        res = self.oracle_resolution
        if isinstance(res, int):
            object.__setattr__(self, "oracle_resolution", (res,) * 3)
        if self.M is not None:
            object.__setattr__(self, "M", to_scalar(self.M))

    def bound(self, K) -> Fraction:
        zmax = max(abs(p.z) for p in K)
        if self.M is None:
            return zmax
        if self.M < zmax:
            raise ValueError(f"M = {self.M} is below max |z| = {zmax}")
        return self.M


@dataclass(frozen=True)
class HeightField:
    """Lower and upper heights per planar grid vertex, with provenance tags."""

    lower: dict
    upper: dict
    lower_tag: dict
    upper_tag: dict

    def bounds(self, v):
        v = PlanarPoint(*v)
        lo, hi = self.lower.get(v), self.upper.get(v)
        return None if lo is None or hi is None else (lo, hi)

    @property
    def vertices(self):
        return tuple(sorted(self.upper))

    def missing(self):
        return [v for v in self.vertices if self.bounds(v) is None]


@dataclass(frozen=True)
class LinearForm:
    """``x - c`` or ``y - c``: a grid line carrying kept edges."""

    axis: str
    value: Fraction

    def poly(self) -> Poly:
        one = Fraction(1)
        return Poly(cx=one, c0=-self.value) if self.axis == "x" else Poly(cy=one, c0=-self.value)

    def __str__(self):
        if self.value == 0:
            return self.axis
        sign = "-" if self.value > 0 else "+"
        return f"{self.axis}{sign}{format_scalar(abs(self.value))}"


@dataclass(frozen=True)
class Rectangle:
    """A kept grid cell ``[x0, x1] x [y0, y1]`` and its bounding quadrics."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction
    q_upper: Optional[Quadric]
    q_lower: Optional[Quadric]

    @property
    def corners(self):
        return (
            PlanarPoint(self.x0, self.y0),
            PlanarPoint(self.x1, self.y0),
            PlanarPoint(self.x1, self.y1),
            PlanarPoint(self.x0, self.y1),
        )

    @property
    def center(self):
        return PlanarPoint((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def contains(self, p) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1


@dataclass(frozen=True)
class Quadrilateral:
    """``conv{(a, lo_a), (a, hi_a), (b, lo_b), (b, hi_b)}`` in the vertical plane over edge ``ab``."""

    a: PlanarPoint
    b: PlanarPoint
    lower: tuple  # heights over a, b
    upper: tuple

    @property
    def corners(self):
        return (
            TriPoint(self.a.x, self.a.y, self.lower[0]),
            TriPoint(self.a.x, self.a.y, self.upper[0]),
            TriPoint(self.b.x, self.b.y, self.lower[1]),
            TriPoint(self.b.x, self.b.y, self.upper[1]),
        )

    def _t(self, p):
        free = 0 if self.a[0] != self.b[0] else 1
        return (p[free] - self.a[free]) / (self.b[free] - self.a[free])

    def bounds_at(self, p):
        if not on_segment(self.a, self.b, p):
            return None
        t = self._t(p)
        return (
            (1 - t) * self.lower[0] + t * self.lower[1],
            (1 - t) * self.upper[0] + t * self.upper[1],
        )

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper


@dataclass(frozen=True)
class Gap:
    vertex: PlanarPoint
    inner: Optional[tuple]
    outer: Optional[tuple]

    def width(self):
        if self.inner is None or self.outer is None:
            return float("inf")
        return max(abs(float(self.inner[0]) - self.outer[0]), abs(float(self.inner[1]) - self.outer[1]))


@dataclass
class HullDiagnostics:
    rounds: int = 0
    inner_converged: bool = False
    t4_configurations: int = 0
    t4_budget_hit: bool = False
    oracle: Optional[dict] = None
    reconcile_tol: Optional[float] = None
    max_gap: Optional[float] = None
    sign_quadrants: dict = field(default_factory=dict)
    slab_violations: list = field(default_factory=list)
    seconds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SemialgebraicDescription:
    """Vertical segments over kept vertices, quadrilaterals over kept edges, quadric slabs over kept rectangles."""

    support: FaceUnion
    points: tuple
    heights: HeightField
    rectangles: tuple
    unresolved: dict = field(default_factory=dict)
    diagnostics: HullDiagnostics = field(default_factory=HullDiagnostics, compare=False)

    @property
    def resolved(self) -> bool:
        return not self.unresolved

    @property
    def vertices(self):
        return tuple(sorted(self.support.vertices))

    @property
    def edges(self):
        return tuple(sorted(self.support.edges))

    @property
    def linear_forms(self):
        forms = set()
        for a, b in self.support.edges:
            if a.x == b.x:
                forms.add(LinearForm("x", a.x))
            else:
                forms.add(LinearForm("y", a.y))
        return tuple(sorted(forms, key=lambda f: (f.axis, f.value)))

    @property
    def quadrics(self):
        """Distinct bounding quadrics, in order of first appearance."""
        out = []
        for r in self.rectangles:
            for q in (r.q_upper, r.q_lower):
                if q is not None and q not in out:
                    out.append(q)
        return tuple(out)

    def bounds_at(self, x, y):
        """``(z_lower, z_upper)`` of the hull over ``(x, y)``, or None outside the planar hull."""
        p = PlanarPoint(to_scalar(x), to_scalar(y))
        if p in self.support.vertices:
            return self.heights.bounds(p)
        for a, b in self.support.edges:
            if on_segment(a, b, p):
                return edge_quadrilateral(self, (a, b)).bounds_at(p)
        for r in self.rectangles:
            if r.contains(p):
                if r.q_upper is None or r.q_lower is None:
                    return None
                return (r.q_lower.height(p.x, p.y), r.q_upper.height(p.x, p.y))
        return None

    def contains(self, p) -> bool:
        return membership_3d(self, p)

    __contains__ = contains


# ---------------------------------------------------------------------------
# inner pass


def _as_points(K):
    pts = []
    for p in K:
        if isinstance(p, TriPoint) and all(isinstance(c, Fraction) for c in p):
            pts.append(p)
        else:
            pts.append(tri(*p))
    if not pts:
        raise EmptyInput("compute_hull needs at least one point")
    return tuple(dict.fromkeys(pts))


def _t4_candidates(vertices, budget):
    """Non-trivial T4 orderings among kept vertices whose inner square is kept, plus whether the budget ran out."""
    kept = set(vertices)
    out = []
    hit = False
    examined = 0
    for quad in combinations(vertices, 4):
        if len({v.x for v in quad}) < 2 or len({v.y for v in quad}) < 2:
            continue
        examined += 1
        if examined > budget:
            hit = True
            break
        t4 = detect_t4(quad)
        if t4 is None or not all(PlanarPoint(*s) in kept for s in t4.square):
            continue
        if all(a == 1 for a in t4.alphas):
            # the corners of a rectangle: every lift reproduces itself
            continue
        try:
            H = height_operator(t4)
        except SingularSystem:
            continue
        out.append((t4, H))
    return out, hit


def _upper_chain(pts):
    """Upper concave chain of ``(position, value)`` pairs sorted by position."""
    chain = []
    for p in pts:
        while len(chain) >= 2:
            (x1, z1), (x2, z2) = chain[-2], chain[-1]
            if (x2 - x1) * (p[1] - z1) - (z2 - z1) * (p[0] - x1) >= 0:
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def _chain_value(chain, x):
    for (x1, z1), (x2, z2) in zip(chain, chain[1:]):
        if x1 <= x <= x2:
            return z1 + (z2 - z1) * (x - x1) / (x2 - x1)
    if len(chain) == 1 and chain[0][0] == x:
        return chain[0][1]
    return None


def _segment_bounds(lines, upper, lower):
    """Heights reachable on rank-one segments between known vertices along each grid line."""
    up, lo = {}, {}
    for axis, line in lines:
        free = 0 if axis == "x" else 1
        known_u = sorted((v[free], upper[v]) for v in line if upper[v] is not None)
        known_l = sorted((v[free], -lower[v]) for v in line if lower[v] is not None)
        if len(known_u) >= 2:
            chain = _upper_chain(known_u)
            for v in line:
                val = _chain_value(chain, v[free])
                if val is not None and (v not in up or val > up[v]):
                    up[v] = val
        if len(known_l) >= 2:
            chain = _upper_chain(known_l)
            for v in line:
                val = _chain_value(chain, v[free])
                if val is not None and (v not in lo or -val < lo[v]):
                    lo[v] = -val
    return up, lo


def inner_heights(K, support: FaceUnion, max_rounds: int = 50, t4_budget: int = 20000):
    """Iterate rank-one segments and T4 lifts on grid vertices to a fixed point.

    Returns ``(HeightField, rounds, converged, t4_count, budget_hit)``. Every
    height produced is attained by a point of the conv_T4 hull, so the
    result is an inner bound.
    """
    K = _as_points(K)
    vertices = sorted(support.vertices)
    upper = {v: None for v in vertices}
    lower = {v: None for v in vertices}
    utag, ltag = {}, {}
    for p in K:
        v = PlanarPoint(p.x, p.y)
        if upper[v] is None or p.z > upper[v]:
            upper[v], utag[v] = p.z, INPUT
        if lower[v] is None or p.z < lower[v]:
            lower[v], ltag[v] = p.z, INPUT
    rows, cols = defaultdict(list), defaultdict(list)
    for v in vertices:
        rows[v.y].append(v)
        cols[v.x].append(v)
    lines = [("x", rows[y]) for y in sorted(rows)] + [("y", cols[x]) for x in sorted(cols)]
    t4s, hit = _t4_candidates(vertices, t4_budget)

    rounds = 0
    converged = False
    while rounds < max_rounds:
        # every proposal is computed from the previous round's state
        seg_u, seg_l = _segment_bounds(lines, upper, lower)
        t4_u, t4_l = {}, {}
        for t4, H in t4s:
            ks = [PlanarPoint(*k) for k in t4.points]
            if any(upper[k] is None for k in ks):
                continue
            for i, s in enumerate(t4.square):
                s = PlanarPoint(*s)
                hi = sum(max(h * upper[k], h * lower[k]) for h, k in zip(H[i], ks))
                lo = sum(min(h * upper[k], h * lower[k]) for h, k in zip(H[i], ks))
                if s not in t4_u or hi > t4_u[s]:
                    t4_u[s] = hi
                if s not in t4_l or lo < t4_l[s]:
                    t4_l[s] = lo
        changed = False
        for props, tag in ((seg_u, SEGMENT), (t4_u, T4_LIFT)):
            for v, z in props.items():
                if upper[v] is None or z > upper[v]:
                    upper[v], utag[v] = z, tag
                    changed = True
        for props, tag in ((seg_l, SEGMENT), (t4_l, T4_LIFT)):
            for v, z in props.items():
                if lower[v] is None or z < lower[v]:
                    lower[v], ltag[v] = z, tag
                    changed = True
        rounds += 1
        if not changed:
            converged = True
            break
    for v in vertices:
        if upper[v] is None:
            utag[v] = ltag[v] = UNRESOLVED
    field_ = HeightField(dict(lower), dict(upper), dict(ltag), dict(utag))
    return field_, rounds, converged, len(t4s), hit


# ---------------------------------------------------------------------------
# outer pass and assembly


def _outer_pass(K, vertices, opts: HullOptions):
    M = opts.bound(K)
    grid = Grid3.aligned(K, opts.oracle_resolution, M if M > 0 else None)
    thr = membership_threshold(grid, opts.membership_c)
    tol = opts.oracle_tol if opts.oracle_tol is not None else 0.02 * thr
    env = multilevel_envelope(K, grid, tol, opts.max_sweeps, opts.threads)
    heights = outer_heights(env, [(float(v.x), float(v.y)) for v in vertices], thr)
    info = {
        "bounds": env.bounds,
        "resolution": env.resolution,
        "spacing": env.h,
        "threshold": thr,
        "tol": tol,
        "sweeps": env.sweeps,
        "residual": env.residual,
        "converged": env.converged,
    }
    return {v: heights[(float(v.x), float(v.y))] for v in vertices}, info


def _rectangles(support: FaceUnion, heights: HeightField):
    out = []
    for face in sorted(support.faces):
        xs = sorted({v.x for v in face})
        ys = sorted({v.y for v in face})
        corners = [PlanarPoint(x, y) for x, y in ((xs[0], ys[0]), (xs[1], ys[0]), (xs[1], ys[1]), (xs[0], ys[1]))]
        b = [heights.bounds(c) for c in corners]
        if any(h is None for h in b):
            out.append(Rectangle(xs[0], xs[1], ys[0], ys[1], None, None))
            continue
        qu = fit_quadric([TriPoint(c.x, c.y, h[1]) for c, h in zip(corners, b)])
        ql = fit_quadric([TriPoint(c.x, c.y, h[0]) for c, h in zip(corners, b)])
        out.append(Rectangle(xs[0], xs[1], ys[0], ys[1], qu, ql))
    return tuple(out)


def _quadrant_signs(rect: Rectangle, K, q: Quadric, sign: int) -> int:
    """Number of quadrants around ``rect`` holding a point of K where ``sign * q > 0``."""
    quads = (
        lambda p: p.x <= rect.x0 and p.y <= rect.y0,
        lambda p: p.x >= rect.x1 and p.y <= rect.y0,
        lambda p: p.x >= rect.x1 and p.y >= rect.y1,
        lambda p: p.x <= rect.x0 and p.y >= rect.y1,
    )
    return sum(1 for inq in quads if any(inq(p) and sign * q(p) > 0 for p in K))


def compute_hull(K: Sequence, opts: Optional[HullOptions] = None, strict: bool = False) -> SemialgebraicDescription:
    """Semialgebraic description of the rank-one convex hull of triangular matrices ``K``.

    Vertices where the inner and outer heights differ by more than the
    reconcile tolerance (or where either is missing) end up in
    ``description.unresolved``; with ``strict=True`` that raises
    :class:`UnresolvedHeights` instead, carrying the description.
    """
    opts = opts or HullOptions()
    K = _as_points(K)
    opts.bound(K)
    diag = HullDiagnostics()
    t0 = time.perf_counter()
    support = separate_hull([PlanarPoint(p.x, p.y) for p in K])
    heights, rounds, converged, n_t4, hit = inner_heights(K, support, opts.max_rounds, opts.t4_budget)
    diag.rounds, diag.inner_converged, diag.t4_configurations, diag.t4_budget_hit = rounds, converged, n_t4, hit
    t1 = time.perf_counter()
    diag.seconds["inner"] = t1 - t0

    unresolved = {}
    vertices = sorted(support.vertices)
    if opts.check_outer:
        outer, info = _outer_pass(K, vertices, opts)
        diag.oracle = info
        diag.seconds["outer"] = time.perf_counter() - t1
        tol = opts.reconcile_tol if opts.reconcile_tol is not None else 2 * info["spacing"]
        diag.reconcile_tol = tol
        worst = 0.0
        for v in vertices:
            gap = Gap(v, heights.bounds(v), outer[v])
            w = gap.width()
            worst = max(worst, w)
            if w > tol:
                unresolved[v] = gap
        diag.max_gap = worst
    else:
        for v in heights.missing():
            unresolved[v] = Gap(v, None, None)

    rects = _rectangles(support, heights)
    for r in rects:
        if r.q_upper is None:
            continue
        diag.sign_quadrants[(r.x0, r.x1, r.y0, r.y1)] = (
            _quadrant_signs(r, K, r.q_upper, 1),
            _quadrant_signs(r, K, r.q_lower, -1),
        )
        for p in r.corners + (r.center,):
            if r.q_upper.height(p.x, p.y) < r.q_lower.height(p.x, p.y):
                diag.slab_violations.append(((r.x0, r.x1, r.y0, r.y1), p))
    desc = SemialgebraicDescription(support, K, heights, rects, unresolved, diag)
    diag.seconds["total"] = time.perf_counter() - t0
    if strict and unresolved:
        raise UnresolvedHeights(desc, unresolved)
    return desc


# ---------------------------------------------------------------------------
# evaluation


def membership_3d(desc: SemialgebraicDescription, p, strict: bool = True) -> bool:
    """True iff ``p`` lies in the hull described by ``desc``.

    A point whose projection misses the planar hull raises
    :class:`OutsidePlanarHull` (or returns False with ``strict=False``), so
    callers can tell it apart from a point at the wrong height.
    """
    if not desc.resolved:
        raise UnresolvedHeights(desc, desc.unresolved)
    q = tri(*p) if not isinstance(p, TriPoint) else TriPoint(*(to_scalar(c) for c in p))
    b = desc.bounds_at(q.x, q.y)
    if b is None:
        if strict:
            raise OutsidePlanarHull(f"({format_scalar(q.x)}, {format_scalar(q.y)}) is outside the planar hull")
        return False
    return b[0] <= q.z <= b[1]


def edge_quadrilateral(desc: SemialgebraicDescription, edge) -> Quadrilateral:
    a, b = (PlanarPoint(*e) for e in edge)
    ha, hb = desc.heights.bounds(a), desc.heights.bounds(b)
    if ha is None or hb is None:
        raise UnresolvedHeights(desc, desc.unresolved)
    return Quadrilateral(a, b, (ha[0], hb[0]), (ha[1], hb[1]))


def vertical_square_restriction(desc: SemialgebraicDescription, edge) -> Quadrilateral:
    """The hull over a kept grid edge: the convex hull of the four corner lifts."""
    a, b = (PlanarPoint(*(to_scalar(c) for c in e)) for e in edge)
    key = (a, b) if a <= b else (b, a)
    if key not in desc.support.edges:
        raise ValueError("not a kept grid edge")
    return edge_quadrilateral(desc, key)


# ---------------------------------------------------------------------------
# glued functions


@dataclass(frozen=True)
class HalfPlane:
    """``x >= c``, ``x <= c``, ``y >= c`` or ``y <= c``."""

    axis: str
    op: str
    value: Fraction

    def __post_init__(self):
        if self.axis not in ("x", "y") or self.op not in (">=", "<="):
            raise ValueError("half-planes are axis-aligned: axis in {x, y}, op in {>=, <=}")
        object.__setattr__(self, "value", to_scalar(self.value))

    def __call__(self, p) -> bool:
        c = p[0] if self.axis == "x" else p[1]
        return c >= self.value if self.op == ">=" else c <= self.value


@dataclass(frozen=True)
class GluingPlane:
    axis: str
    value: Fraction
    pieces: tuple  # indices of the two pieces meeting there
    identity: bool  # the two polynomials coincide on the whole plane


@dataclass(frozen=True)
class PiecewiseQuadric:
    """First-match dispatch over axis-aligned regions; an empty region means everywhere."""

    pieces: tuple  # (regions tuple, Poly)
    gluing: tuple = ()

    def piece_at(self, p) -> int:
        for i, (region, _) in enumerate(self.pieces):
            if all(h(p) for h in region):
                return i
        raise ValueError("regions do not cover this point")

    def __call__(self, p):
        return self.pieces[self.piece_at(p)][1](p)

    @property
    def advisory(self):
        """Gluing planes on which continuity is not a polynomial identity."""
        return tuple(g for g in self.gluing if not g.identity)

    def continuous_on(self, axis, value) -> bool:
        value = to_scalar(value)
        return all(g.identity for g in self.gluing if g.axis == axis and g.value == value)


def _as_poly(q) -> Poly:
    if isinstance(q, Quadric):
        return q.as_poly()
    if isinstance(q, Poly):
        return q
    return Poly(*(to_scalar(c) for c in q))


def _probe(region, h: HalfPlane, side: int):
    """A point just across (``side=+1``) or just inside (``side=-1``) the boundary of ``h`` within ``region``."""
    other = "y" if h.axis == "x" else "x"
    lo, hi = None, None
    for g in region:
        if g.axis == other:
            if g.op == ">=":
                lo = g.value if lo is None else max(lo, g.value)
            else:
                hi = g.value if hi is None else min(hi, g.value)
    if lo is not None and hi is not None:
        t = (lo + hi) / 2
    elif lo is not None:
        t = lo + 1
    elif hi is not None:
        t = hi - 1
    else:
        t = Fraction(0)
    step = Fraction(1, 2**20) * (1 if h.op == ">=" else -1)
    c = h.value - side * step
    return (c, t) if h.axis == "x" else (t, c)


def build_glued_function(pieces) -> PiecewiseQuadric:
    """Glue ``(regions, polynomial)`` pieces into a dispatching evaluator.

    Each boundary plane of a restricted region is declared a gluing plane
    between that piece and the piece found just across it; ``identity``
    records whether the two polynomials agree on the whole plane.
    """
    norm = []
    for region, q in pieces:
        region = tuple(h if isinstance(h, HalfPlane) else HalfPlane(*h) for h in region)
        norm.append((region, _as_poly(q)))
    f = PiecewiseQuadric(tuple(norm))
    gluing = []
    for i, (region, poly) in enumerate(norm):
        for h in region:
            try:
                j = f.piece_at(_probe(region, h, +1))
            except ValueError:
                continue
            if j == i:
                continue
            diff = (poly - norm[j][1]).restrict(h.axis, h.value)
            g = GluingPlane(h.axis, h.value, (i, j), diff.is_zero())
            if g not in gluing:
                gluing.append(g)
    return PiecewiseQuadric(tuple(norm), tuple(gluing))


def factor_xy(poly: Poly):
    """Write a z-free ``a xy + b x + c y + d`` as ``a (x - r) (y - s)``; returns ``(a, r, s)`` or None."""
    if poly.cz != 0 or poly.cxy == 0:
        return None
    a, b, c, d = poly.cxy, poly.cx, poly.cy, poly.c0
    if a * d != b * c:
        return None
    return a, -c / a, -b / a
