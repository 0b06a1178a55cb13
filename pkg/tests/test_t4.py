import itertools
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rchull.exceptions import SingularFit
from rchull.geometry import AXIS_CONE, Quadric, planar, quadric_eval, tri
from rchull.t4 import detect_t4, fit_quadric, height_operator, solve_heights

from .conftest import TARTAR, LIFTED

coord = st.integers(-5, 5).map(Fraction)
mult = st.fractions(min_value=1, max_value=4, max_denominator=6)
height = st.fractions(min_value=-3, max_value=3, max_denominator=7)


@st.composite
def t4_points(draw):
    a, c = draw(coord), draw(coord)
    b, d = draw(coord), draw(coord)
    assume(a != c and b != d)
    sq = [planar(a, b), planar(c, b), planar(c, d), planar(a, d)]
    alphas = [draw(mult) for _ in range(4)]
    return [
        planar(sq[i].x + al * (sq[(i + 1) % 4].x - sq[i].x), sq[i].y + al * (sq[(i + 1) % 4].y - sq[i].y))
        for i, al in enumerate(alphas)
    ]


def test_tartar_detection():
    t4 = detect_t4(TARTAR, AXIS_CONE)
    assert t4 is not None
    assert t4.base == planar(-1, 1)
    assert t4.legs == (planar(2, 0), planar(0, -2), planar(-2, 0), planar(0, 2))
    assert t4.alphas == (2, 2, 2, 2)
    assert t4.lambdas == (Fraction(1, 2),) * 4
    assert not t4.degenerate


def test_collinear_has_no_t4():
    assert detect_t4([planar(i, 0) for i in range(4)], AXIS_CONE) is None


def test_lifted_heights_and_quadric():
    t4 = detect_t4([(p.x, p.y) for p in LIFTED[:4]], AXIS_CONE)
    lift = solve_heights(t4, [p.z for p in LIFTED[:4]])
    heights = dict(zip(t4.square, lift.z_q))
    assert heights[planar(-1, 1)] == Fraction(-4, 15)
    assert lift.quadric.integer_scaled() == (60, 5, -9, -3, 15)


@pytest.mark.parametrize("z, expected", [((0, 0, 0, 0), 0), ((1, 1, 1, 1), 1)])
def test_constant_heights_are_preserved(z, expected):
    lift = solve_heights(detect_t4(TARTAR, AXIS_CONE), z)
    assert all(h == expected for h in lift.z_q)


def test_reference_quadrics():
    K1, K2, K3, K4, K5 = LIFTED
    assert fit_quadric([K1, K2, K3, K4]).integer_scaled() == (60, 5, -9, -3, 15)
    assert fit_quadric([K2, K3, K4, K5]).integer_scaled() == (118, -12, -57, -19, -36)
    assert fit_quadric([K1, K4, K5, tri(-1, 1, Fraction(-4, 15))]).integer_scaled() == (45, -29, 26, -35, 44)


def test_aux_point_for_q4_is_computed():
    q3 = Quadric.from_scaled(118, -12, -57, -19, -36)
    q4 = Quadric.from_scaled(118, -143, 205, 112, -298)
    # both reference quadrics pass through (-1, 2, -7/118)
    assert q3.height(-1, 2) == q4.height(-1, 2) == Fraction(-7, 118)


def test_singular_fit():
    pts = [tri(0, 0, 0), tri(1, 0, 0), tri(2, 0, 1), tri(3, 0, 0)]
    with pytest.raises(SingularFit):
        fit_quadric(pts)


@given(t4_points(), st.lists(height, min_size=4, max_size=4))
def test_lift_vanishes_on_all_eight_points(K, z):
    t4 = detect_t4(K, AXIS_CONE)
    assert t4 is not None
    lift = solve_heights(t4, z)
    for p in lift.k_points + lift.q_points:
        assert quadric_eval(lift.quadric, p) == 0
    lam = t4.lambdas
    Q, Kp = lift.q_points, lift.k_points
    for i in range(4):
        for c in range(3):
            assert Q[i][c] == lam[i] * Kp[i - 1][c] + (1 - lam[i]) * Q[i - 1][c]


@given(t4_points())
def test_height_operator_is_stochastic(K):
    t4 = detect_t4(K, AXIS_CONE)
    H = height_operator(t4)
    for row in H:
        assert sum(row) == 1
        assert all(v >= 0 for v in row)


@given(t4_points(), st.lists(height, min_size=4, max_size=4), height, height, height)
def test_affine_equivariance(K, z, a, b, c):
    t4 = detect_t4(K, AXIS_CONE)
    q0 = solve_heights(t4, z).quadric
    shifted = [zi + a * p.x + b * p.y + c for zi, p in zip(z, t4.points)]
    q1 = solve_heights(t4, shifted).quadric
    assert q1.alpha == q0.alpha
    assert (q1.beta, q1.gamma, q1.delta) == (q0.beta - a, q0.gamma - b, q0.delta - c)


@given(t4_points(), st.permutations(range(4)))
def test_detection_is_permutation_invariant(K, perm):
    assert detect_t4([K[i] for i in perm], AXIS_CONE) is not None


@given(st.lists(st.builds(planar, coord, coord), min_size=4, max_size=4, unique=True))
def test_detection_agrees_across_orderings(K):
    found = [detect_t4(list(p), AXIS_CONE) is not None for p in itertools.permutations(K)]
    assert all(found) or not any(found)


def test_degenerate_t4_is_admitted():
    # alpha_1 = 1: K1 sits on the square corner
    K = [planar(1, 0), planar(1, -2), planar(-2, -1), planar(0, 3)]
    t4 = detect_t4(K, AXIS_CONE)
    assert t4 is not None and t4.degenerate
    lift = solve_heights(t4, [0, 1, -1, 2])
    for p in lift.k_points + lift.q_points:
        assert quadric_eval(lift.quadric, p) == 0
