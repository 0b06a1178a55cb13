"""scikit-learn style wrappers around the hull pipelines.

``fit`` takes the point set K, ``predict`` answers membership for query
points and ``transform`` returns a numeric feature per query (vertical
bounds or envelope values). Input can be a float array, or any nested
sequence of ints, Fractions or ``"p/q"`` strings when exact coordinates
matter.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dplane import d_hull_2d
from .envelope import Grid3, envelope_value, membership_threshold, multilevel_envelope
from .exceptions import EmptyInput
from .geometry import DirectionCone, PlanarPoint, TriPoint, to_scalar
from .io import read_cone
from .planar import membership_2d, separate_hull
from .triangular import HullOptions, compute_hull, membership_3d


def check_points(X, dim: int, exact: bool = True):
    """Validate a point collection with ``dim`` columns.

    Returns a list of PlanarPoint/TriPoint with Fraction coordinates when
    ``exact``, else a float array of shape ``(n, dim)``.
    """
    if isinstance(X, np.ndarray) and X.dtype != object:
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != dim:
            raise ValueError(f"expected an array with {dim} columns, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("input contains NaN or infinity")
        rows = arr.tolist()
    else:
        rows = [list(r) for r in X]
        if any(len(r) != dim for r in rows):
            raise ValueError(f"every point needs {dim} coordinates")
    if not rows:
        raise EmptyInput("no points")
    if not exact:
        return np.asarray([[float(c) for c in r] for r in rows], dtype=float)
    cls = PlanarPoint if dim == 2 else TriPoint
    return [cls(*(to_scalar(c) for c in r)) for r in rows]


def _cone(cone) -> DirectionCone:
    return cone if isinstance(cone, DirectionCone) else read_cone(cone)


class SeparateHull(BaseEstimator):
    """Separately convex hull of planar points (two-axis cone)."""

    def fit(self, X, y=None):
        self.points_ = check_points(X, 2)
        self.hull_ = separate_hull(self.points_)
        self.n_rounds_ = self.hull_.rounds
        return self

    def predict(self, X):
        check_is_fitted(self, "hull_")
        return np.array([membership_2d(self.hull_, p) for p in check_points(X, 2)], dtype=bool)


class DirectionalHull(BaseEstimator):
    """D-convex hull of planar points for a finite direction cone.

    ``cone`` is a :class:`DirectionCone`, ``"axis"``, ``"equilateral"``, a
    ``"1,0;0,1;3,2"`` string or a ``{"directions": ...}`` mapping.
    """

    def __init__(self, cone="axis"):
        self.cone = cone

    def fit(self, X, y=None):
        cone = _cone(self.cone)
        self.points_ = check_points(X, 2)
        self.hull_ = d_hull_2d(self.points_, cone)
        self.n_rounds_ = self.hull_.rounds
        return self

    def predict(self, X):
        check_is_fitted(self, "hull_")
        return np.array([membership_2d(self.hull_, p) for p in check_points(X, 2)], dtype=bool)


class TriangularHull(BaseEstimator, TransformerMixin):
    """Rank-one convex hull of upper-triangular matrices ``(x, y, z)``.

    ``transform`` maps ``(x, y)`` or ``(x, y, z)`` rows to the vertical
    bounds ``(z_lower, z_upper)`` of the hull (NaN outside the planar hull).
    """

    def __init__(
        self,
        M=None,
        max_rounds=50,
        oracle_resolution=60,
        reconcile_tol=None,
        check_outer=True,
        threads=1,
        strict=False,
    ):
        self.M = M
        self.max_rounds = max_rounds
        self.oracle_resolution = oracle_resolution
        self.reconcile_tol = reconcile_tol
        self.check_outer = check_outer
        self.threads = threads
        self.strict = strict

    def _options(self) -> HullOptions:
        return HullOptions(
            M=self.M,
            max_rounds=self.max_rounds,
            oracle_resolution=self.oracle_resolution,
            reconcile_tol=self.reconcile_tol,
            check_outer=self.check_outer,
            threads=self.threads,
        )

    def fit(self, X, y=None):
        self.points_ = check_points(X, 3)
        self.description_ = compute_hull(self.points_, self._options(), strict=self.strict)
        self.resolved_ = self.description_.resolved
        return self

    def predict(self, X):
        check_is_fitted(self, "description_")
        return np.array([membership_3d(self.description_, p, strict=False) for p in check_points(X, 3)], dtype=bool)

    def transform(self, X):
        check_is_fitted(self, "description_")
        rows = [list(r) for r in (X.tolist() if isinstance(X, np.ndarray) else X)]
        out = np.full((len(rows), 2), np.nan)
        for i, r in enumerate(rows):
            if len(r) not in (2, 3):
                raise ValueError("transform expects rows (x, y) or (x, y, z)")
            b = self.description_.bounds_at(r[0], r[1])
            if b is not None:
                out[i] = [float(b[0]), float(b[1])]
        return out


class RankOneEnvelope(BaseEstimator, TransformerMixin):
    """Discrete rank-one convex envelope of ``d_K^2`` on a regular grid.

    ``transform`` interpolates the envelope at query points; ``predict``
    thresholds it at ``membership_c * h^2``.
    """

    def __init__(self, resolution=60, M=None, tol=1e-9, max_sweeps=100, threads=1, membership_c=0.5, aligned=True):
        self.resolution = resolution
        self.M = M
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.threads = threads
        self.membership_c = membership_c
        self.aligned = aligned

    def fit(self, X, y=None):
        K = check_points(X, 3)
        res = (self.resolution,) * 3 if isinstance(self.resolution, (int, np.integer)) else tuple(self.resolution)
        M = None if self.M is None else float(Fraction(to_scalar(self.M)))
        make = Grid3.aligned if self.aligned else Grid3.around
        grid = make(K, res, M)
        self.points_ = K
        self.grid_ = multilevel_envelope(K, grid, self.tol, self.max_sweeps, self.threads)
        self.threshold_ = membership_threshold(self.grid_, self.membership_c)
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        return envelope_value(self.grid_, check_points(X, 3, exact=False))

    def predict(self, X):
        v = self.transform(X)
        return np.nan_to_num(v, nan=np.inf) <= self.threshold_


__all__ = ["check_points", "SeparateHull", "DirectionalHull", "TriangularHull", "RankOneEnvelope"]
