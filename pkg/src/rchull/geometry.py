"""Points, direction cones, rank-one predicates and monic ruled quadrics.

Triangular 2x2 matrices ``((x, z), (0, y))`` are stored as :class:`TriPoint`
and diagonal ones as :class:`PlanarPoint`. All combinatorial code runs on
exact scalars (``Fraction`` by default); floats only appear in the envelope
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .exceptions import SingularSystem
from .fields import QSqrt3, _frac


class PlanarPoint(NamedTuple):
    x: object
    y: object


class TriPoint(NamedTuple):
    x: object
    y: object
    z: object


def to_scalar(value) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` / decimal strings or floats to a Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    return _frac(value)


def format_scalar(value) -> str:
    """Serialize an exact scalar: ``"p/q"``, ``"p"``, or ``"a+b*sqrt3"``."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, int):
        return str(value)
    return str(value)


def planar(x, y) -> PlanarPoint:
    return PlanarPoint(to_scalar(x), to_scalar(y))


def tri(x, y, z) -> TriPoint:
    return TriPoint(to_scalar(x), to_scalar(y), to_scalar(z))


def project(p: TriPoint) -> PlanarPoint:
    return PlanarPoint(p.x, p.y)


def lift(p: PlanarPoint, z) -> TriPoint:
    return TriPoint(p.x, p.y, z)


def rank_one_connected(a: TriPoint, b: TriPoint) -> bool:
    """True iff ``b - a`` is a nonzero rank-one triangular matrix."""
    if a == b:
        return False
    return (a.x - b.x) * (a.y - b.y) == 0


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def orient(a, b, c):
    """Twice the signed area of triangle abc (positive when counter-clockwise)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


# ---------------------------------------------------------------------------
# direction cones


def _canonical_direction(d):
    dx, dy = d
    if dx == 0 and dy == 0:
        raise ValueError("zero direction vector")
    if isinstance(dx, Fraction) and isinstance(dy, Fraction):
        den = math.lcm(dx.denominator, dy.denominator)
        ix, iy = int(dx * den), int(dy * den)
        g = math.gcd(ix, iy)
        ix, iy = ix // g, iy // g
        if ix < 0 or (ix == 0 and iy < 0):
            ix, iy = -ix, -iy
        return (Fraction(ix), Fraction(iy))
    # non-rational field: scale so the leading nonzero component is 1
    lead = dx if dx != 0 else dy
    return (dx / lead, dy / lead)


@dataclass(frozen=True)
class DirectionCone:
    """A finite set of pairwise non-parallel planar directions.

    Directions are normalized to a canonical representative: a primitive
    integer vector with positive leading entry for rational input, or a
    vector with leading entry 1 otherwise.
    """

    directions: tuple

    def __post_init__(self):
        if not self.directions:
            raise ValueError("a direction cone needs at least one direction")
        canon = tuple(_canonical_direction(tuple(d)) for d in self.directions)
        for i in range(len(canon)):
            for j in range(i + 1, len(canon)):
                if cross(canon[i], canon[j]) == 0:
                    raise ValueError(f"directions {i} and {j} are parallel")
        object.__setattr__(self, "directions", canon)

    @classmethod
    def from_pairs(cls, pairs, field="rational"):
        if field == "sqrt3":
            from .fields import parse_qsqrt3

            return cls(tuple((parse_qsqrt3(a), parse_qsqrt3(b)) for a, b in pairs))
        return cls(tuple((to_scalar(a), to_scalar(b)) for a, b in pairs))

    @property
    def is_axis(self) -> bool:
        return set(self.directions) == {(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))}

    def __len__(self):
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)


AXIS_CONE = DirectionCone(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))


def equilateral_cone() -> DirectionCone:
    """Directions (1, 0), (1, sqrt 3), (1, -sqrt 3) in exact Q(sqrt 3) arithmetic."""
    one = QSqrt3(1)
    return DirectionCone(((one, QSqrt3(0)), (one, QSqrt3(0, 1)), (one, QSqrt3(0, -1))))


# ---------------------------------------------------------------------------
# polynomials in x, y, z with monomials z, xy, x, y, 1

_MONOMIALS = ("z", "xy", "x", "y", "1")


@dataclass(frozen=True)
class Poly:
    """Polynomial ``cz*z + cxy*xy + cx*x + cy*y + c0`` with exact coefficients."""

    cz: object = Fraction(0)
    cxy: object = Fraction(0)
    cx: object = Fraction(0)
    cy: object = Fraction(0)
    c0: object = Fraction(0)

    def coeffs(self):
        return (self.cz, self.cxy, self.cx, self.cy, self.c0)

    def __call__(self, p):
        x, y = p[0], p[1]
        z = p[2] if len(p) > 2 else 0
        return self.cz * z + self.cxy * x * y + self.cx * x + self.cy * y + self.c0

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(*(a + b for a, b in zip(self.coeffs(), other.coeffs())))

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly(*(a - b for a, b in zip(self.coeffs(), other.coeffs())))

    def __neg__(self) -> "Poly":
        return Poly(*(-a for a in self.coeffs()))

    def scale(self, c) -> "Poly":
        return Poly(*(c * a for a in self.coeffs()))

    __rmul__ = scale

    def restrict(self, axis: str, value) -> "Poly":
        """Substitute ``x = value`` or ``y = value``; the result no longer depends on that variable."""
        if axis == "x":
            return Poly(self.cz, 0, 0, self.cy + self.cxy * value, self.c0 + self.cx * value)
        if axis == "y":
            return Poly(self.cz, 0, self.cx + self.cxy * value, 0, self.c0 + self.cy * value)
        raise ValueError("axis must be 'x' or 'y'")

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs())

    def __str__(self):
        return format_poly(self.coeffs())


def format_poly(coeffs) -> str:
    parts = []
    for c, m in zip(coeffs, _MONOMIALS):
        if c == 0:
            continue
        mag = abs(c)
        sign = "-" if c < 0 else "+"
        if m == "1":
            body = format_scalar(mag)
        elif mag == 1:
            body = m
        else:
            body = f"{format_scalar(mag)}{m}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += sign + body
    return out


@dataclass(frozen=True)
class Quadric:
    """Monic ruled quadric ``q(x, y, z) = z + alpha*x*y + beta*x + gamma*y + delta``.

    Its restriction to any plane ``x = c`` or ``y = c`` is affine, so it is
    affine along every rank-one direction of the triangular matrices.
    """

    alpha: object = Fraction(0)
    beta: object = Fraction(0)
    gamma: object = Fraction(0)
    delta: object = Fraction(0)

    def __call__(self, p):
        return quadric_eval(self, p)

    def height(self, x, y):
        """The z at which ``q`` vanishes above ``(x, y)``."""
        return -(self.alpha * x * y + self.beta * x + self.gamma * y + self.delta)

    def as_poly(self) -> Poly:
        return Poly(Fraction(1), self.alpha, self.beta, self.gamma, self.delta)

    def integer_scaled(self):
        """Coefficients ``(cz, cxy, cx, cy, c0)`` scaled by the lcm of denominators."""
        coeffs = [Fraction(c) for c in (1, self.alpha, self.beta, self.gamma, self.delta)]
        den = 1
        for c in coeffs:
            den = math.lcm(den, c.denominator)
        ints = [int(c * den) for c in coeffs]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        return tuple(ints)

    def display(self) -> str:
        """Integer-scaled text form, e.g. ``60z+5xy-9x-3y+15``."""
        return format_poly(self.integer_scaled())

    @classmethod
    def from_scaled(cls, cz, cxy, cx, cy, c0) -> "Quadric":
        cz = to_scalar(cz)
        if cz == 0:
            raise ValueError("coefficient of z must be nonzero")
        return cls(*(to_scalar(c) / cz for c in (cxy, cx, cy, c0)))

    def __str__(self):
        return format_poly((1, self.alpha, self.beta, self.gamma, self.delta))


def quadric_eval(q: Quadric, p):
    return p[2] + q.alpha * p[0] * p[1] + q.beta * p[0] + q.gamma * p[1] + q.delta


# ---------------------------------------------------------------------------
# exact linear algebra


def solve_linear(A: Sequence[Sequence], b: Sequence):
    """Solve ``A x = b`` by Gaussian elimination over an exact field.

    Raises :class:`SingularSystem` when ``A`` is singular.
    """
    n = len(A)
    # plain ints would divide to floats
    M = [[Fraction(v) if isinstance(v, int) else v for v in list(row) + [rhs]] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            raise SingularSystem("singular linear system")
        M[col], M[pivot] = M[pivot], M[col]
        pv = M[col][col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / pv
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def convex_hull_2d(points):
    """Counter-clockwise convex hull (Andrew's monotone chain) with exact predicates.

    Collinear boundary points are dropped. Fewer than three distinct points
    come back as-is (sorted).
    """
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def in_convex_polygon(poly, p) -> bool:
    """Closed membership test for a CCW convex polygon (also handles segments and points)."""
    if len(poly) == 1:
        return tuple(p) == tuple(poly[0])
    if len(poly) == 2:
        return on_segment(poly[0], poly[1], p)
    n = len(poly)
    for i in range(n):
        if orient(poly[i], poly[(i + 1) % n], p) < 0:
            return False
    return True


def on_segment(a, b, p) -> bool:
    """Closed segment membership, exact."""
    if orient(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
