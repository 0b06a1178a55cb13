"""T4 configurations for the two-axis cone: detection, height lifting and quadric fitting.

A T4 is an ordered quadruple K1..K4 with base P and axis-parallel legs
C1..C4 (alternating horizontal and vertical, summing to zero) such that
``K_i = P + C_1 + ... + C_{i-1} + alpha_i C_i`` with every ``alpha_i >= 1``.
The inner square has vertices ``P_i = P + C_1 + ... + C_{i-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Optional, Sequence

from .exceptions import SingularFit, SingularSystem
from .geometry import AXIS_CONE, DirectionCone, PlanarPoint, Quadric, TriPoint, project, solve_linear


@dataclass(frozen=True)
class T4Data:
    points: tuple  # K1..K4
    base: PlanarPoint
    legs: tuple  # C1..C4
    alphas: tuple
    square: tuple  # P1..P4, P1 == base
    lambdas: tuple  # P_i = lambda_i K_{i-1} + (1 - lambda_i) P_{i-1}
    first_axis: str  # "x" when C1 is horizontal

    @property
    def degenerate(self) -> bool:
        return any(a == 1 for a in self.alphas)


def _swap(p):
    return PlanarPoint(p[1], p[0])


def _closed_form(K):
    """T4 data for the ordering ``K`` with C1 horizontal, or None."""
    (x1, y1), (x2, y2), (x3, y3), (x4, y4) = K
    if x2 == x4 or y3 == y1:
        return None
    alphas = (
        (x1 - x4) / (x2 - x4),
        (y2 - y1) / (y3 - y1),
        (x3 - x2) / (x4 - x2),
        (y4 - y3) / (y1 - y3),
    )
    if any(a < 1 for a in alphas):
        return None
    square = (PlanarPoint(x4, y1), PlanarPoint(x2, y1), PlanarPoint(x2, y3), PlanarPoint(x4, y3))
    return alphas, square


def _build(K, alphas, square, first_axis):
    legs = tuple(
        PlanarPoint(square[(i + 1) % 4][0] - square[i][0], square[(i + 1) % 4][1] - square[i][1]) for i in range(4)
    )
    lambdas = tuple(1 / alphas[i - 1] for i in range(4))
    return T4Data(tuple(K), square[0], legs, alphas, square, lambdas, first_axis)


def detect_t4(points: Sequence, cone: DirectionCone = AXIS_CONE) -> Optional[T4Data]:
    """First (possibly degenerate) T4 ordering of four planar points, or None.

    Orderings are the 24 permutations in lexicographic order of input
    position; for each, a horizontal first leg is tried before a vertical one.
    """
    if not cone.is_axis:
        raise ValueError("detect_t4 is defined for the two-axis cone; use dplane.detect_t3 for other cones")
    pts = [PlanarPoint(p[0], p[1]) for p in points]
    if len(pts) != 4 or len(set(pts)) != 4:
        return None
    for perm in permutations(pts):
        res = _closed_form(perm)
        if res is not None:
            return _build(perm, res[0], res[1], "x")
        swapped = [_swap(p) for p in perm]
        res = _closed_form(swapped)
        if res is not None:
            alphas, square = res
            return _build(perm, alphas, tuple(_swap(s) for s in square), "y")
    return None


@dataclass(frozen=True)
class T4Lift:
    t4: T4Data
    z_k: tuple
    z_q: tuple
    quadric: Quadric

    @property
    def k_points(self):
        return tuple(TriPoint(p[0], p[1], z) for p, z in zip(self.t4.points, self.z_k))

    @property
    def q_points(self):
        return tuple(TriPoint(p[0], p[1], z) for p, z in zip(self.t4.square, self.z_q))


def _heights(t4: T4Data, z):
    lam = t4.lambdas
    zero = lam[0] - lam[0]
    A, b = [], []
    for i in range(4):
        j = (i + 1) % 4
        row = [zero] * 4
        row[i] = (lam[j] - 1) / lam[j]
        row[j] = row[j] + 1 / lam[j]
        A.append(row)
        b.append(z[i])
    try:
        return tuple(solve_linear(A, b))
    except SingularSystem:
        raise SingularSystem("T4 height system is singular", lambdas=lam) from None


def height_operator(t4: T4Data):
    """The 4x4 matrix ``H`` with ``z_Q = H z_K`` (rows indexed by square corner)."""
    zero = t4.lambdas[0] - t4.lambdas[0]
    cols = [_heights(t4, [zero + (1 if j == i else 0) for j in range(4)]) for i in range(4)]
    return tuple(tuple(cols[j][i] for j in range(4)) for i in range(4))


def solve_heights(t4: T4Data, z: Sequence) -> T4Lift:
    """Lift a planar T4 to heights ``z`` over K1..K4 and solve for the square's heights."""
    if len(z) != 4:
        raise ValueError("need one height per T4 point")
    zq = _heights(t4, z)
    k = [TriPoint(p[0], p[1], h) for p, h in zip(t4.points, z)]
    q = [TriPoint(p[0], p[1], h) for p, h in zip(t4.square, zq)]
    quadric = _fit_with_fallback(k, q)
    return T4Lift(t4, tuple(z), zq, quadric)


def fit_quadric(points) -> Quadric:
    """Monic quadric ``z + a xy + b x + c y + d`` through four lifted points.

    Passing a :class:`T4Lift` fits on its K points (falling back to any
    nonsingular 4-subset of the eight points) and checks that the result
    vanishes on all eight.
    """
    if isinstance(points, T4Lift):
        return _fit_with_fallback(list(points.k_points), list(points.q_points))
    pts = [TriPoint(*p) for p in points]
    if len(pts) != 4:
        raise ValueError("fit_quadric needs exactly four points")
    A = [[p.x * p.y, p.x, p.y, 1] for p in pts]
    try:
        sol = solve_linear(A, [-p.z for p in pts])
    except SingularSystem:
        raise SingularFit("projected points do not determine a unique quadric") from None
    return Quadric(*sol)


def _fit_with_fallback(k, q) -> Quadric:
    everything = list(k) + list(q)
    candidates = [k] + [list(c) for c in combinations(everything, 4)]
    for cand in candidates:
        if len({project(p) for p in cand}) < 4:
            continue
        try:
            quad = fit_quadric(cand)
        except SingularFit:
            continue
        if any(quad(p) != 0 for p in everything):
            raise AssertionError("fitted quadric does not vanish on every lifted T4 point")
        return quad
    raise SingularFit("no 4-subset of the lifted T4 determines a unique quadric")
