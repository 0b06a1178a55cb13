"""Rank-one convex hulls of triangular matrices and directional hulls in the plane."""

from .dplane import RefinementReport, T3Data, d_hull_2d, detect_t3, refine_grid, t3_hull_3d
from .envelope import Grid3, compute_envelope, init_distance_field, multilevel_envelope, rc_envelope
from .estimators import DirectionalHull, RankOneEnvelope, SeparateHull, TriangularHull, check_points
from .exceptions import (
    BadRatio,
    DegeneratePlane,
    EmptyInput,
    FormatError,
    NonConvergence,
    NotOnSegment,
    NotRankOne,
    OutsidePlanarHull,
    SingularFit,
    SingularSystem,
    UnresolvedHeights,
)
from .fields import QSqrt3
from .geometry import AXIS_CONE, DirectionCone, PlanarPoint, Poly, Quadric, TriPoint, equilateral_cone, planar, tri
from .laminate import Laminate, barycenter, certify, pair, search_certificate, split, t4_laminate
from .planar import FaceUnion, PlanarGrid, build_grid, membership_2d, separate_hull
from .t4 import T4Data, T4Lift, detect_t4, fit_quadric, solve_heights
from .triangular import (
    HullOptions,
    SemialgebraicDescription,
    build_glued_function,
    compute_hull,
    edge_quadrilateral,
    membership_3d,
    vertical_square_restriction,
)

__version__ = "0.1.0"
