"""Laminates of finite order as immutable splitting trees.

A laminate starts as a Dirac mass and is refined by elementary splittings:
a leaf at ``A = lam*a + (1-lam)*b`` with ``a - b`` rank-one is replaced by
children ``a`` and ``b`` carrying ``lam`` and ``1 - lam`` of its weight.
Everything is exact, so pairings against the rank-one affine quadrics
reproduce their value at the barycenter identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .exceptions import BadRatio, NotOnSegment, NotRankOne
from .geometry import TriPoint, rank_one_connected, to_scalar, tri
from .t4 import T4Data, T4Lift


def _point(p) -> TriPoint:
    if isinstance(p, TriPoint) and all(isinstance(c, Fraction) for c in p):
        return p
    if len(p) == 2:
        return tri(p[0], p[1], 0)
    return tri(*p)


@dataclass(frozen=True)
class Node:
    point: TriPoint
    weight: Fraction
    children: tuple = ()
    ratio: Optional[Fraction] = None  # share of the first child

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def direction(self):
        if self.is_leaf:
            return None
        a, b = self.children[0].point, self.children[1].point
        return TriPoint(a.x - b.x, a.y - b.y, a.z - b.z)


@dataclass(frozen=True)
class Laminate:
    root: Node

    @classmethod
    def dirac(cls, point) -> "Laminate":
        return cls(Node(_point(point), Fraction(1)))

    def leaves(self):
        """Leaf nodes, depth first with the first child before the second."""
        return [n for n, _ in self.leaves_with_depth()]

    def leaves_with_depth(self):
        out, stack = [], [(self.root, 0)]
        while stack:
            n, d = stack.pop()
            if n.is_leaf:
                out.append((n, d))
            else:
                stack.append((n.children[1], d + 1))
                stack.append((n.children[0], d + 1))
        return out

    @property
    def support(self):
        """``(weight, point)`` pairs with equal points merged, in leaf order."""
        acc = {}
        for leaf in self.leaves():
            acc[leaf.point] = acc.get(leaf.point, Fraction(0)) + leaf.weight
        return [(w, p) for p, w in acc.items()]

    @property
    def order(self) -> int:
        """Depth of the splitting tree."""
        return max(d for _, d in self.leaves_with_depth())

    def __len__(self):
        return len(self.leaves())


def split(lam: Laminate, leaf_index: int, a, b, ratio) -> Laminate:
    """Replace leaf ``leaf_index`` at ``ratio*a + (1-ratio)*b`` by ``a`` and ``b``."""
    a, b = _point(a), _point(b)
    ratio = to_scalar(ratio)
    if not 0 < ratio < 1:
        raise BadRatio(f"split ratio must lie strictly between 0 and 1, got {ratio}")
    if not rank_one_connected(a, b):
        raise NotRankOne("split endpoints must differ by a nonzero rank-one matrix")
    leaves = lam.leaves()
    if not 0 <= leaf_index < len(leaves):
        raise IndexError("leaf index out of range")
    target = leaves[leaf_index]
    mid = TriPoint(*(ratio * u + (1 - ratio) * v for u, v in zip(a, b)))
    if mid != target.point:
        raise NotOnSegment("leaf point is not ratio*a + (1-ratio)*b")
    new = Node(
        target.point,
        target.weight,
        (Node(a, target.weight * ratio), Node(b, target.weight * (1 - ratio))),
        ratio,
    )
    return Laminate(_replace(lam.root, target, new))


def _replace(node: Node, old: Node, new: Node) -> Node:
    if node is old:
        return new
    if node.is_leaf:
        return node
    kids = tuple(_replace(c, old, new) for c in node.children)
    if all(k is c for k, c in zip(kids, node.children)):
        return node
    return Node(node.point, node.weight, kids, node.ratio)


def barycenter(lam: Laminate) -> TriPoint:
    acc = [Fraction(0)] * 3
    for leaf in lam.leaves():
        for k in range(3):
            acc[k] += leaf.weight * leaf.point[k]
    return TriPoint(*acc)


def pair(lam: Laminate, f: Callable):
    """``sum_i w_i f(A_i)``; ``f`` may be a :class:`Quadric`, :class:`Poly` or any callable."""
    return sum((leaf.weight * f(leaf.point) for leaf in lam.leaves()), Fraction(0))


def check_invariants(lam: Laminate) -> None:
    """Raise AssertionError unless weights, rank-one splits and barycenters are consistent."""
    total = sum(leaf.weight for leaf in lam.leaves())
    assert total == lam.root.weight, "weights do not add up"
    stack = [lam.root]
    while stack:
        n = stack.pop()
        assert n.weight > 0
        if n.is_leaf:
            continue
        a, b = n.children
        assert rank_one_connected(a.point, b.point)
        assert a.weight + b.weight == n.weight
        mid = TriPoint(*(n.ratio * u + (1 - n.ratio) * v for u, v in zip(a.point, b.point)))
        assert mid == n.point
        stack.extend(n.children)


def squared_distance(K) -> Callable:
    """Exact ``d_K^2``: squared Euclidean distance to the nearest point of K."""
    pts = [_point(p) for p in K]

    def d2(p):
        return min((p[0] - q.x) ** 2 + (p[1] - q.y) ** 2 + (p[2] - q.z) ** 2 for q in pts)

    return d2


# ---------------------------------------------------------------------------
# T4 recursion


def t4_laminate(t4, steps: int, start: int = 0) -> Laminate:
    """The laminate after ``steps`` splittings of ``delta_{P_start}`` around a T4.

    Each step splits the only non-K leaf ``P_i = lam_i K_{i-1} + (1-lam_i) P_{i-1}``
    into ``P_{i-1}`` (listed first) and ``K_{i-1}``. Accepts a planar
    :class:`T4Data` (lifted flat) or a :class:`T4Lift`.
    """
    if isinstance(t4, T4Lift):
        ks, ps, lams = t4.k_points, t4.q_points, t4.t4.lambdas
    elif isinstance(t4, T4Data):
        zero = Fraction(0)
        ks = tuple(TriPoint(p[0], p[1], zero) for p in t4.points)
        ps = tuple(TriPoint(p[0], p[1], zero) for p in t4.square)
        lams = t4.lambdas
    else:
        raise TypeError("expected T4Data or T4Lift")
    lam = Laminate.dirac(ps[start])
    i = start
    for _ in range(steps):
        j = (i - 1) % 4
        idx = next(n for n, leaf in enumerate(lam.leaves()) if leaf.point == ps[i])
        lam = split(lam, idx, ps[j], ks[j], 1 - lams[i])
        i = j
    return lam


# ---------------------------------------------------------------------------
# certificate search


def _chain(desc, axis: str, c):
    """Breakpoints ``(t, z_lo, z_hi)`` of the hull slice in the plane ``{y = c}`` (axis "x") or ``{x = c}``.

    ``t`` runs along the free coordinate. Returns None when the line misses
    the planar hull.
    """
    free = 0 if axis == "x" else 1
    coords = sorted({v[free] for v in desc.support.vertices})
    pts = []
    for t in coords:
        xy = (t, c) if axis == "x" else (c, t)
        b = desc.bounds_at(*xy)
        if b is not None:
            pts.append((t, b[0], b[1]))
    return pts


def _run(chain, k, col):
    """Endpoints of the maximal straight run of a chain through breakpoint ``k`` (``(k, k)`` at a corner)."""
    if 0 < k < len(chain) - 1:
        (t1, z1), (t2, z2), (t3, z3) = ((chain[n][0], chain[n][col]) for n in (k - 1, k, k + 1))
        if (t2 - t1) * (z3 - z1) == (z2 - z1) * (t3 - t1):
            return _extend(chain, k - 1, k + 1, col)
    return k, k


def _chain_split(desc, p: TriPoint):
    """A rank-one split of ``p`` inside the hull, or None if ``p`` is extreme in both rank-one planes."""
    b = desc.bounds_at(p.x, p.y)
    if b is None:
        return None
    lo, hi = b
    if lo < p.z < hi:
        top, bot = TriPoint(p.x, p.y, hi), TriPoint(p.x, p.y, lo)
        return top, bot, (p.z - lo) / (hi - lo)
    for axis in ("x", "y"):
        free = 0 if axis == "x" else 1
        fixed = p[1 - free]
        chain = _chain(desc, axis, fixed)
        if len(chain) < 2:
            continue
        t = p[free]
        for side in ("upper", "lower"):
            col = 2 if side == "upper" else 1
            if p.z != (hi if side == "upper" else lo):
                continue
            # locate p on the chain
            pos = next((n for n, row in enumerate(chain) if row[0] == t), None)
            if pos is None:
                n = next((n for n in range(len(chain) - 1) if chain[n][0] < t < chain[n + 1][0]), None)
                if n is None:
                    continue
                i, j = n, n + 1
                i, j = _extend(chain, i, j, col)
            else:
                i, j = _run(chain, pos, col)
                if i == j:
                    continue
            ta, za = chain[i][0], chain[i][col]
            tb, zb = chain[j][0], chain[j][col]

            def at(tt, zz):
                return TriPoint(tt, fixed, zz) if axis == "x" else TriPoint(fixed, tt, zz)

            ratio = (tb - t) / (tb - ta)
            return at(ta, za), at(tb, zb), ratio
    return None


def _extend(chain, i, j, col):
    def collinear(a, b, c):
        (t1, z1), (t2, z2), (t3, z3) = ((chain[n][0], chain[n][col]) for n in (a, b, c))
        return (t2 - t1) * (z3 - z1) == (z2 - z1) * (t3 - t1)

    while i - 1 >= 0 and collinear(i - 1, i, j):
        i -= 1
    while j + 1 < len(chain) and collinear(i, j, j + 1):
        j += 1
    return i, j


@dataclass
class CertificateSearch:
    laminate: Laminate
    value: Fraction
    success: bool
    splits: int
    trace: list = field(default_factory=list)  # (split number, leaf point, leaf weight, pairing after)
    stuck: list = field(default_factory=list)  # leaves with no admissible split


def search_certificate(desc, target, eps=1e-4, max_depth: int = 200, max_splits: int = 5000) -> CertificateSearch:
    """Greedy laminate construction with barycenter ``target`` driving ``<nu, d_K^2>`` down.

    Repeatedly takes the leaf with the largest ``weight * d_K^2`` and splits
    it vertically towards the quadric bounds if it is strictly between them,
    otherwise along the straight boundary run of a rank-one slice of the
    hull through it (horizontal plane first). Stops once the pairing is at
    most ``eps``, or at the depth or split cap.
    """
    from .triangular import membership_3d

    p = _point(target)
    if not membership_3d(desc, p):
        raise ValueError("target is not in the described hull")
    d2 = squared_distance(desc.points)
    eps = to_scalar(eps)
    lam = Laminate.dirac(p)
    value = d2(p)
    trace, stuck = [], set()
    splits = 0
    while value > eps and splits < max_splits:
        cands = [
            (leaf.weight * d2(leaf.point), n, leaf)
            for n, (leaf, d) in enumerate(lam.leaves_with_depth())
            if leaf.point not in stuck and d < max_depth
        ]
        cands = [c for c in cands if c[0] > 0]
        if not cands:
            break
        _, idx, leaf = max(cands, key=lambda c: c[0])
        move = _chain_split(desc, leaf.point)
        if move is None:
            stuck.add(leaf.point)
            continue
        a, b, ratio = move
        lam = split(lam, idx, a, b, ratio)
        splits += 1
        value = pair(lam, d2)
        trace.append((splits, leaf.point, leaf.weight, value))
    return CertificateSearch(lam, value, value <= eps, splits, trace, sorted(stuck))


def certify(desc, target, eps=1e-4, max_depth: int = 200, max_splits: int = 5000) -> Optional[Laminate]:
    """A laminate with barycenter ``target`` and ``<nu, d_K^2> <= eps``, or None."""
    res = search_certificate(desc, target, eps, max_depth, max_splits)
    return res.laminate if res.success else None


def pairing_residuals(lam: Laminate, K):
    """Weights of the leaves not in K, in leaf order (the residual-weight law)."""
    pts = {_point(k) for k in K}
    return [leaf.weight for leaf in lam.leaves() if leaf.point not in pts]


__all__ = [
    "Node",
    "Laminate",
    "split",
    "barycenter",
    "pair",
    "check_invariants",
    "squared_distance",
    "t4_laminate",
    "search_certificate",
    "certify",
    "pairing_residuals",
    "CertificateSearch",
]
