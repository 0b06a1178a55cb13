"""Discretized rank-one convex envelope of the squared distance to K.

The rank-one directions of triangular matrices span the planes ``{y = c}``
and ``{x = c}``, so one sweep replaces every ``y``-slice and then every
``x``-slice of a node field by its exact lower convex envelope (lower
facets of the 3D convex hull of the slice's (index, index, value) cloud).
Points where the converged envelope is nearly zero form an outer
approximation of the rank-one convex hull. Float arithmetic throughout.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from math import gcd
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import ConvexHull, QhullError

from .exceptions import EmptyInput, NonConvergence

DEFAULT_TOL = 1e-9
MEMBERSHIP_C = 0.5
BACKENDS = ("grid", "qhull")


@dataclass(frozen=True)
class Grid3:
    """Node field on ``[x0,x1] x [y0,y1] x [z0,z1]`` with ``resolution`` cells per axis."""

    bounds: tuple  # ((x0, x1), (y0, y1), (z0, z1))
    resolution: tuple  # cells (nx, ny, nz)
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    sweeps: int = 0
    residual: float = float("nan")
    converged: bool = False

    def __post_init__(self):
        if len(self.resolution) != 3 or any(int(n) < 2 for n in self.resolution):
            raise ValueError("grid resolution must be >= 2 cells per axis")
        for lo, hi in self.bounds:
            if not hi > lo:
                raise ValueError("grid bounds must have positive extent")

    @classmethod
    def around(cls, points, resolution=(60, 60, 60), M=None, pad=0.0) -> "Grid3":
        """Grid over the planar bounding box of ``points`` times ``[-M, M]``."""
        P = np.asarray([[float(c) for c in p] for p in points], dtype=float)
        if P.size == 0:
            raise EmptyInput("no points")
        if M is None:
            M = float(np.max(np.abs(P[:, 2])))
        M = max(float(M), 1.0) if M == 0 else float(M)
        bounds = []
        for k in range(2):
            lo, hi = P[:, k].min() - pad, P[:, k].max() + pad
            if hi <= lo:
                lo, hi = lo - 1.0, hi + 1.0
            bounds.append((float(lo), float(hi)))
        bounds.append((-M, M))
        if isinstance(resolution, int):
            resolution = (resolution,) * 3
        return cls(tuple(bounds), tuple(int(n) for n in resolution))

    @classmethod
    def aligned(cls, points, resolution=(60, 60, 60), M=None) -> "Grid3":
        """Like :meth:`around`, but the planar spacing is ``1/(D k)`` for an integer ``k``.

        ``D`` is the common denominator of the planar coordinates, so every
        projected point lands on a grid node. The ranges are widened
        symmetrically to fit ``resolution`` cells. Falls back to
        :meth:`around` on an axis too coarse to be aligned.
        """
        base = cls.around(points, resolution, M)
        bounds = list(base.bounds)
        for k in range(2):
            coords = [Fraction(str(float(p[k]))) if isinstance(p[k], float) else Fraction(p[k]) for p in points]
            D = 1
            for c in coords:
                D = D * c.denominator // gcd(D, c.denominator)
            lo, hi = min(coords), max(coords)
            n = base.resolution[k]
            extent = hi - lo
            mult = n // (D * extent) if extent > 0 else n // (2 * D)
            if mult < 1:
                continue
            step = Fraction(1, D * int(mult))
            slack = n * step - extent
            lo = lo - (slack / step // 2) * step
            bounds[k] = (float(lo), float(lo + n * step))
        return cls(tuple(bounds), base.resolution)

    @property
    def axes(self):
        return tuple(np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(self.bounds, self.resolution))

    @property
    def spacing(self):
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.resolution))

    @property
    def h(self) -> float:
        return max(self.spacing)

    @property
    def shape(self):
        return tuple(n + 1 for n in self.resolution)

    def with_values(self, values, **kw) -> "Grid3":
        return replace(self, values=values, **kw)


def init_distance_field(K, grid: Grid3) -> Grid3:
    """Nodewise ``min_i |node - K_i|^2``."""
    P = np.asarray([[float(c) for c in p] for p in K], dtype=float)
    if P.size == 0:
        raise EmptyInput("no points")
    xs, ys, zs = grid.axes
    out = np.full(grid.shape, np.inf)
    for px, py, pz in P:
        d = (xs[:, None, None] - px) ** 2 + (ys[None, :, None] - py) ** 2 + (zs[None, None, :] - pz) ** 2
        np.minimum(out, d, out=out)
    return grid.with_values(out, sweeps=0, residual=float("nan"), converged=False)


def _hull(pts):
    try:
        return ConvexHull(pts)
    except QhullError:
        return ConvexHull(pts, qhull_options="QJ")


def _candidate_vertices(F, eps):
    """Mask of nodes strictly convex along both their row and column.

    Any other node lies on or above the chord between its two neighbours,
    so it cannot be a vertex of the lower hull and dropping it leaves the
    hull unchanged.
    """
    keep = np.ones(F.shape, dtype=bool)
    keep[1:-1, :] &= F[1:-1, :] < 0.5 * (F[:-2, :] + F[2:, :]) - eps
    keep[:, 1:-1] &= F[:, 1:-1] < 0.5 * (F[:, :-2] + F[:, 2:]) - eps
    return keep


def lower_envelope_2d(F: np.ndarray) -> np.ndarray:
    """Lower convex envelope of a 2D node array, evaluated at the nodes.

    Uses index coordinates. Each lower facet's plane is evaluated over its
    bounding box of nodes and the nodewise maximum is kept; since every
    lower facet supports the envelope this reproduces it exactly.
    """
    n, m = F.shape
    fmin, fmax = float(F.min()), float(F.max())
    if fmax - fmin <= 1e-14 * max(1.0, abs(fmax)):
        return F.copy()
    keep = _candidate_vertices(F, 1e-13 * max(1.0, abs(fmax)))
    I, J = np.nonzero(keep)
    pts = np.column_stack([I.astype(float), J.astype(float), F[keep]])
    hull = _hull(pts)
    eq = hull.equations
    lower = eq[:, 2] < -1e-12
    simp = hull.simplices[lower]
    eq = eq[lower]
    ij = np.column_stack([I, J]).astype(np.int64)
    vi = ij[simp, 0]
    vj = ij[simp, 1]
    i0, i1 = vi.min(axis=1), vi.max(axis=1)
    j0, j1 = vj.min(axis=1), vj.max(axis=1)
    w = j1 - j0 + 1
    sizes = (i1 - i0 + 1) * w
    tri = np.repeat(np.arange(len(simp)), sizes)
    starts = np.cumsum(sizes) - sizes
    off = np.arange(int(sizes.sum())) - np.repeat(starts, sizes)
    ii = i0[tri] + off // w[tri]
    jj = j0[tri] + off % w[tri]
    a, b, c, d = eq[tri, 0], eq[tri, 1], eq[tri, 2], eq[tri, 3]
    val = -(a * ii + b * jj + d) / c
    out = np.full(n * m, -np.inf)
    np.maximum.at(out, ii * m + jj, val)
    out = out.reshape(n, m)
    return np.minimum(out, F)


def slice_envelope(F: np.ndarray, backend: str = "grid") -> np.ndarray:
    """Lower convex envelope of one slice with the chosen backend.

    ``"grid"`` is the compiled incremental hull over integer node
    coordinates; it defers to qhull if it ever reports a degeneracy.
    """
    if backend == "qhull":
        return lower_envelope_2d(F)
    if backend != "grid":
        raise ValueError(f"unknown envelope backend {backend!r}")
    from ._gridhull import lower_envelope_grid

    out, ok = lower_envelope_grid(np.ascontiguousarray(F, dtype=float))
    return out if ok else lower_envelope_2d(F)


def _half_sweep(V, axis, threads, dirty=None, backend="grid"):
    """Convexify the slices orthogonal to ``axis`` (0: x fixed, 1: y fixed).

    Slices with ``dirty[k]`` false are already convex and are copied.
    """
    out = V.copy()
    count = V.shape[axis]

    def work(k):
        if dirty is not None and not dirty[k]:
            return
        if axis == 0:
            out[k, :, :] = slice_envelope(V[k, :, :], backend)
        else:
            out[:, k, :] = slice_envelope(V[:, k, :], backend)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(count)))
    else:
        for k in range(count):
            work(k)
    return out


def rc_envelope(
    field: Grid3, tol: float = DEFAULT_TOL, max_sweeps: int = 100, threads: int = 1, backend: str = "grid"
) -> Grid3:
    """Iterate y-slice then x-slice convexification to a fixed point.

    Stops once a full sweep lowers no node by ``tol`` or more. Hitting
    ``max_sweeps`` first emits a :class:`NonConvergence` warning; the last
    field is returned either way.
    """
    if field.values is None:
        raise ValueError("grid has no values; call init_distance_field first")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    V = np.array(field.values, dtype=float)
    residual = float("inf")
    sweeps = 0
    quiet = tol * 1e-3
    dirty_y = None
    while sweeps < max_sweeps:
        # a slice needs work only if the other family changed it since its last pass
        W1 = _half_sweep(V, 1, threads, dirty_y, backend)
        dirty_x = None if sweeps == 0 else np.any(V - W1 > quiet, axis=(1, 2))
        W = _half_sweep(W1, 0, threads, dirty_x, backend)
        dirty_y = np.any(W1 - W > quiet, axis=(0, 2))
        residual = float(np.max(V - W))
        V = W
        sweeps += 1
        if residual < tol:
            break
    converged = residual < tol
    if not converged:
        warnings.warn(
            f"envelope did not converge in {sweeps} sweeps (residual {residual:.3e})", NonConvergence, stacklevel=2
        )
    return field.with_values(V, sweeps=sweeps, residual=residual, converged=converged)


def membership_threshold(grid: Grid3, C: float = MEMBERSHIP_C) -> float:
    return C * grid.h**2


def _column(grid: Grid3, v):
    idx = []
    for k, ((lo, hi), n) in enumerate(zip(grid.bounds[:2], grid.resolution[:2])):
        c = float(v[k])
        h = (hi - lo) / n
        if c < lo - 0.5 * h or c > hi + 0.5 * h:
            return None
        idx.append(int(min(n, max(0, round((c - lo) / h)))))
    return tuple(idx)


def outer_heights(grid: Grid3, vertices: Sequence, threshold: Optional[float] = None) -> dict:
    """Per planar vertex, ``(lower, upper)`` z with envelope value <= threshold, or None.

    Each vertex is snapped to its nearest grid column.
    """
    if grid.values is None:
        raise ValueError("grid has no values")
    if threshold is None:
        threshold = membership_threshold(grid)
    zs = grid.axes[2]
    out = {}
    for v in vertices:
        col = _column(grid, v)
        if col is None:
            out[v] = None
            continue
        ok = np.nonzero(grid.values[col[0], col[1], :] <= threshold)[0]
        out[v] = None if ok.size == 0 else (float(zs[ok[0]]), float(zs[ok[-1]]))
    return out


def envelope_value(grid: Grid3, points) -> np.ndarray:
    """Trilinear interpolation of the field; NaN outside the grid."""
    interp = RegularGridInterpolator(grid.axes, grid.values, bounds_error=False, fill_value=np.nan)
    P = np.asarray([[float(c) for c in p] for p in points], dtype=float).reshape(-1, 3)
    return interp(P)


def prolong(coarse: Grid3, fine: Grid3) -> np.ndarray:
    """Trilinear interpolation of a coarse field onto the nodes of a finer grid."""
    interp = RegularGridInterpolator(coarse.axes, coarse.values, bounds_error=False, fill_value=None)
    X, Y, Z = np.meshgrid(*fine.axes, indexing="ij")
    return interp(np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])).reshape(fine.shape)


def _halvable(grid: Grid3, min_cells: int) -> bool:
    return all(n % 2 == 0 and n // 2 >= min_cells for n in grid.resolution)


def multilevel_envelope(
    K, grid: Grid3, tol=DEFAULT_TOL, max_sweeps=100, threads=1, backend="grid", min_cells=8
) -> Grid3:
    """Envelope on ``grid``, started from the envelope on the half-resolution grid.

    Coarse nodes are fine nodes, so the fine envelope restricted to them is
    slice-convex and below the coarse envelope; being convex along every
    axis line it also stays below the trilinear interpolant. Hence
    ``min(d^2, prolonged coarse envelope)`` lies between the fine envelope
    and ``d^2`` and the iteration from it reaches the same fixed point.
    """
    field = init_distance_field(K, grid)
    if _halvable(grid, min_cells):
        half = replace(grid, resolution=tuple(n // 2 for n in grid.resolution), values=None)
        coarse = multilevel_envelope(K, half, tol, max_sweeps, threads, backend, min_cells)
        field = field.with_values(np.minimum(field.values, prolong(coarse, grid)))
    return rc_envelope(field, tol, max_sweeps, threads, backend)


def compute_envelope(
    K, resolution=(60, 60, 60), M=None, tol=DEFAULT_TOL, max_sweeps=100, threads=1, backend="grid", multilevel=True
) -> Grid3:
    """Convenience pipeline: grid around ``K``, squared distance, envelope."""
    grid = Grid3.around(K, resolution, M)
    if multilevel:
        return multilevel_envelope(K, grid, tol, max_sweeps, threads, backend)
    return rc_envelope(init_distance_field(K, grid), tol, max_sweeps, threads, backend)


def write_vtk(grid: Grid3, fh, name: str = "envelope") -> None:
    """ASCII legacy VTK structured-points dump (x varies fastest)."""
    nx, ny, nz = grid.shape
    hx, hy, hz = grid.spacing
    x0, y0, z0 = (b[0] for b in grid.bounds)
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write(f"{name}\nASCII\nDATASET STRUCTURED_POINTS\n")
    fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
    fh.write(f"ORIGIN {x0:.9g} {y0:.9g} {z0:.9g}\n")
    fh.write(f"SPACING {hx:.9g} {hy:.9g} {hz:.9g}\n")
    fh.write(f"POINT_DATA {nx * ny * nz}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n")
    flat = np.transpose(grid.values, (2, 1, 0)).ravel()
    for k in range(0, flat.size, 8):
        fh.write(" ".join(f"{v:.9g}" for v in flat[k : k + 8]) + "\n")
