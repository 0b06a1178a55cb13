import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rchull.envelope import (
    Grid3,
    envelope_value,
    init_distance_field,
    membership_threshold,
    multilevel_envelope,
    outer_heights,
    rc_envelope,
    write_vtk,
)
from rchull.exceptions import NonConvergence
from rchull.geometry import planar, tri

from .conftest import TARTAR_FLAT, LIFTED

points3 = st.lists(
    st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2)), min_size=2, max_size=5, unique=True
)


@pytest.fixture(scope="module")
def lifted_env():
    grid = Grid3.aligned(LIFTED, (32, 32, 32))
    return multilevel_envelope(LIFTED, grid)


def test_distance_field_examples():
    grid = Grid3(((-3.0, 3.0), (-3.0, 3.0), (-3.0, 3.0)), (6, 6, 6))
    f = init_distance_field(LIFTED, grid)
    xs, ys, zs = grid.axes
    at = {(float(x), float(y), float(z)): f.values[i, j, k] for i, x in enumerate(xs) for j, y in enumerate(ys) for k, z in enumerate(zs)}
    assert at[(0.0, 0.0, 0.0)] == 10
    assert at[(3.0, 1.0, 0.0)] == 0
    single = init_distance_field([tri(0, 0, 0)], grid)
    assert single.values[4, 3, 3] == 1


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid3(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (1, 4, 4))
    with pytest.raises(ValueError):
        Grid3(((0.0, 0.0), (0.0, 1.0), (0.0, 1.0)), (4, 4, 4))


def test_aligned_grid_hits_input_points():
    grid = Grid3.aligned(LIFTED, (32, 32, 32))
    xs, ys, _ = grid.axes
    for p in LIFTED:
        assert np.min(np.abs(xs - float(p.x))) < 1e-9
        assert np.min(np.abs(ys - float(p.y))) < 1e-9


def test_convex_field_is_fixed():
    grid = Grid3(((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), (8, 8, 8))
    X, Y, Z = np.meshgrid(*grid.axes, indexing="ij")
    field = grid.with_values(X**2 + 2 * Y**2 + (Z - 0.3) ** 2)
    out = rc_envelope(field)
    assert out.converged and out.sweeps == 1
    np.testing.assert_allclose(out.values, field.values, atol=1e-12)


def test_tartar_corner_is_in_the_hull():
    grid = Grid3.aligned(TARTAR_FLAT, (24, 24, 24), M=1)
    env = multilevel_envelope(TARTAR_FLAT, grid)
    thr = membership_threshold(env)
    assert envelope_value(env, [(-1, 1, 0)])[0] <= thr
    assert envelope_value(env, [(0, 0, 0.5)])[0] > thr
    assert envelope_value(env, [(2, 2, 0)])[0] > thr


def test_outer_heights(lifted_env):
    env = lifted_env
    h = env.h
    out = outer_heights(env, [planar(0, 0), planar(2, 2), planar(9, 9)])
    lo, hi = out[planar(0, 0)]
    assert abs(lo - (-0.25)) <= 2 * h
    assert abs(hi - 18 / 59) <= 2 * h
    lo, hi = out[planar(2, 2)]
    assert abs(lo - 2) <= 2 * h and abs(hi - 2) <= 2 * h
    assert out[planar(9, 9)] is None


def test_envelope_vanishes_on_K(lifted_env):
    vals = envelope_value(lifted_env, [tuple(float(c) for c in p) for p in LIFTED])
    assert np.all(np.abs(vals) < 1e-9)
    assert np.all(lifted_env.values >= -1e-9)


def test_laminate_certified_points_pass(lifted_env, lifted_flat_desc):
    from rchull.laminate import certify

    thr = membership_threshold(lifted_env)
    for target in [(0, 0, 0), (1, 1, 0), (-1, -1, -0.5)]:
        lam = certify(lifted_flat_desc, tri(*target), eps=1e-3)
        assert lam is not None
        assert envelope_value(lifted_env, [target])[0] <= thr


@settings(max_examples=15)
@given(points3)
def test_sweeps_decrease_monotonically(pts):
    K = [tri(*p) for p in pts]
    grid = Grid3.around(K, (8, 8, 8), M=3)
    f0 = init_distance_field(K, grid)
    prev = f0.values
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergence)
        for n in (1, 2, 3):
            cur = rc_envelope(f0, max_sweeps=n).values
            assert np.all(cur <= prev + 1e-12)
            prev = cur
    assert np.all(prev >= -1e-9)


@settings(max_examples=10)
@given(points3)
def test_fixed_point_is_slice_convex(pts):
    K = [tri(*p) for p in pts]
    grid = Grid3.around(K, (8, 8, 8), M=3)
    V = rc_envelope(init_distance_field(K, grid), tol=1e-10, max_sweeps=200).values
    tol = 1e-8
    # the x-z slices (y fixed) and y-z slices (x fixed)
    assert np.all(V[1:-1, :, :] <= 0.5 * (V[:-2, :, :] + V[2:, :, :]) + tol)
    assert np.all(V[:, 1:-1, :] <= 0.5 * (V[:, :-2, :] + V[:, 2:, :]) + tol)
    assert np.all(V[:, :, 1:-1] <= 0.5 * (V[:, :, :-2] + V[:, :, 2:]) + tol)
    assert np.all(V[1:-1, :, 1:-1] <= 0.5 * (V[:-2, :, :-2] + V[2:, :, 2:]) + tol)


def test_multilevel_reaches_same_fixed_point():
    grid = Grid3.aligned(LIFTED, (16, 16, 16))
    direct = rc_envelope(init_distance_field(LIFTED, grid), tol=1e-11, max_sweeps=500).values
    multi = multilevel_envelope(LIFTED, grid, tol=1e-11, max_sweeps=500, min_cells=4).values
    np.testing.assert_allclose(multi, direct, atol=1e-6)


def test_threads_do_not_change_result():
    grid = Grid3.aligned(LIFTED, (16, 16, 16))
    f = init_distance_field(LIFTED, grid)
    np.testing.assert_array_equal(rc_envelope(f, threads=1).values, rc_envelope(f, threads=4).values)


def test_backends_agree():
    grid = Grid3.aligned(LIFTED, (12, 12, 12))
    f = init_distance_field(LIFTED, grid)
    a = rc_envelope(f, backend="grid").values
    b = rc_envelope(f, backend="qhull").values
    np.testing.assert_allclose(a, b, atol=1e-7)


def test_nonconvergence_warns():
    grid = Grid3.aligned(LIFTED, (16, 16, 16))
    with pytest.warns(NonConvergence):
        out = rc_envelope(init_distance_field(LIFTED, grid), max_sweeps=1)
    assert not out.converged and out.sweeps == 1


def test_refinement_does_not_inflate_heights():
    coarse = multilevel_envelope(LIFTED, Grid3.aligned(LIFTED, (16, 16, 16)))
    fine = multilevel_envelope(LIFTED, Grid3.aligned(LIFTED, (32, 32, 32)))
    v = planar(0, 0)
    lo_c, hi_c = outer_heights(coarse, [v])[v]
    lo_f, hi_f = outer_heights(fine, [v])[v]
    assert hi_f <= hi_c + coarse.h and lo_f >= lo_c - coarse.h


def test_vtk_header():
    grid = Grid3(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (2, 2, 2))
    f = init_distance_field([tri(0, 0, 0)], grid)
    buf = io.StringIO()
    write_vtk(f, buf)
    text = buf.getvalue().splitlines()
    assert text[0].startswith("# vtk DataFile")
    assert "DIMENSIONS 3 3 3" in text
    assert len(" ".join(text[text.index("LOOKUP_TABLE default") + 1 :]).split()) == 27
