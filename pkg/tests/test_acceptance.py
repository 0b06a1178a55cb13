"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python -m tests.test_acceptance``) for just the summary lines,
or under pytest where the lines also appear in the terminal summary.
"""

import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from rchull._gridhull import lower_envelope_grid
from rchull.dplane import d_hull_2d, parallelogram_60, refine_grid, snap
from rchull.geometry import AXIS_CONE, DirectionCone, Poly, Quadric, TriPoint, equilateral_cone, planar
from rchull.io import face_union_to_dict
from rchull.laminate import (
    Laminate,
    barycenter,
    pair,
    pairing_residuals,
    search_certificate,
    split,
    squared_distance,
    t4_laminate,
)
from rchull.planar import separate_hull
from rchull.t4 import detect_t4, solve_heights
from rchull.triangular import HullOptions, build_glued_function, compute_hull, factor_xy

from tests.acceptance_log import record
from tests.conftest import PINWHEEL, TARTAR, TARTAR_FLAT, LIFTED, LIFTED_HEIGHTS

GOLDEN = Path(__file__).parent / "golden"

Q1 = Quadric.from_scaled(60, 5, -9, -3, 15)
Q2 = Quadric.from_scaled(45, -29, 26, -35, 44)
Q3 = Quadric.from_scaled(118, -12, -57, -19, -36)
Q4 = Quadric.from_scaled(118, -143, 205, 112, -298)


def _warm_up():
    # load the compiled envelope kernel before anything is timed
    lower_envelope_grid(np.add.outer(np.arange(4.0) ** 2, np.arange(4.0) ** 2))


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    hull = separate_hull(PINWHEEL)
    dt = time.perf_counter() - t0
    hexagon = [planar(*p) for p in [(2, 1), (2, 2), (-1, 2), (-1, -1), (1, -1), (1, 1)]]
    loops = hull.boundary_polygons()
    same_cycle = len(loops) == 1 and _cyclic_equal(loops[0], hexagon)
    want_segments = {
        frozenset({planar(1, -3), planar(1, 2)}),
        frozenset({planar(-1, 1), planar(3, 1)}),
        frozenset({planar(-1, -1), planar(-1, 3)}),
        frozenset({planar(-3, -1), planar(1, -1)}),
        frozenset({planar(-1, 2), planar(2, 2)}),
        frozenset({planar(2, 1), planar(2, 2)}),
    }
    got_segments = {frozenset(s) for s in hull.maximal_segments()}
    ok = hull.rounds == 3 and same_cycle and got_segments == want_segments and dt < 1.0
    detail = f"rounds={hull.rounds}, hexagon={'ok' if same_cycle else loops}, segments={len(got_segments)}, {dt:.3f}s"
    return ok, detail


def _cyclic_equal(loop, target):
    n = len(target)
    if len(loop) != n:
        return False
    for shift in range(n):
        rot = loop[shift:] + loop[:shift]
        if rot == target or rot[::-1] == target:
            return True
    return False


def criterion_2():
    _warm_up()
    t0 = time.perf_counter()
    desc = compute_hull(LIFTED, HullOptions(oracle_resolution=60))
    dt = time.perf_counter() - t0
    got_q = set(desc.quadrics)
    forms = {str(f) for f in desc.linear_forms}
    want_forms = {"x-2", "x-1", "x+1", "y-2", "y-1", "y+1"}
    ok = desc.resolved and got_q == {Q1, Q2, Q3, Q4} and forms == want_forms and dt < 10.0
    shown = sorted(q.display() for q in got_q)
    return ok, f"quadrics={shown}, forms={sorted(forms)}, resolved={desc.resolved}, {dt:.2f}s (60^3 oracle)"


def _random_t4(rng):
    """Random rational T4 built forward from a square, legs and multipliers >= 1."""

    def r(lo, hi, den=4):
        return Fraction(rng.randint(lo * den, hi * den), den)

    x0, y0 = r(-5, 5), r(-5, 5)
    w, h = r(1, 4) + Fraction(1, 4), r(1, 4) + Fraction(1, 4)
    square = [planar(x0, y0), planar(x0 + w, y0), planar(x0 + w, y0 + h), planar(x0, y0 + h)]
    pts = []
    for i in range(4):
        a, b = square[i], square[(i + 1) % 4]
        alpha = 1 + r(0, 3) if rng.random() < 0.9 else Fraction(1)
        pts.append(planar(a.x + alpha * (b.x - a.x), a.y + alpha * (b.y - a.y)))
    rng.shuffle(pts)
    return pts


def _random_laminate(rng, start, splits=6):
    lam = Laminate.dirac(start)
    for _ in range(splits):
        leaves = lam.leaves()
        k = rng.randrange(len(leaves))
        p = leaves[k].point
        t = Fraction(rng.randint(1, 9), 10)
        mode = rng.randrange(3)
        d = [Fraction(rng.randint(-6, 6), 3) for _ in range(3)]
        if mode == 0:
            d[1] = Fraction(0)
        elif mode == 1:
            d[0] = Fraction(0)
        else:
            d[0] = d[1] = Fraction(0)
        if all(c == 0 for c in d):
            d[2] = Fraction(1)
        # p = t*a + (1-t)*b with a - b = d
        a = TriPoint(*(c + (1 - t) * e for c, e in zip(p, d)))
        b = TriPoint(*(c - t * e for c, e in zip(p, d)))
        lam = split(lam, k, a, b, t)
    return lam


def criterion_3(n_configs=200, n_laminates=50, seed=20240611):
    rng = random.Random(seed)
    vanish_fail = jensen_fail = detected = 0
    for _ in range(n_configs):
        pts = _random_t4(rng)
        t4 = detect_t4(pts)
        if t4 is None:
            vanish_fail += 1
            continue
        detected += 1
        z = [Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for _ in range(4)]
        lift = solve_heights(t4, z)
        q = lift.quadric
        if any(q(p) != 0 for p in lift.k_points + lift.q_points):
            vanish_fail += 1
        for _ in range(n_laminates):
            start = rng.choice(lift.k_points + lift.q_points)
            start = TriPoint(start.x + Fraction(rng.randint(-4, 4), 5), start.y, start.z + Fraction(rng.randint(-4, 4), 7))
            lam = _random_laminate(rng, start)
            if pair(lam, q) != q(barycenter(lam)):
                jensen_fail += 1
    ok = vanish_fail == 0 and jensen_fail == 0 and detected == n_configs
    return ok, f"{detected}/{n_configs} configurations, vanishing failures={vanish_fail}, Jensen failures={jensen_fail}"


def criterion_4():
    p1, p2, p3, p4 = (Poly(*map(Fraction, c)) for c in [(60, 5, -9, -3, 15), (45, -29, 26, -35, 44),
                                                         (118, -12, -57, -19, -36), (118, -143, 205, 112, -298)])
    g = p1.scale(Fraction(3, 4)) - p2
    c1 = g.restrict("x", -1).is_zero() and g.restrict("y", 1).is_zero()
    d = p3 - p4
    c2 = d.restrict("x", 1).is_zero()
    monic = Q3.as_poly() - Q4.as_poly()
    fac = factor_xy(monic)
    c3 = fac == (Fraction(131, 118), Fraction(1), Fraction(2))
    f_low = build_glued_function([((("x", ">=", -1), ("y", ">=", 1)), p2.scale(-1)), ((), p1.scale(Fraction(-3, 4)))])
    c4 = all(gp.identity for gp in f_low.gluing) and len(f_low.gluing) == 2
    ok = c1 and c2 and c3 and c4
    return ok, (
        f"(3/4)q1-q2 zero on x=-1,y=1: {c1}; q3-q4 zero on x=1: {c2}; "
        f"monic q3-q4 = {fac[0]}(x-{fac[1]})(y-{fac[2]}): {c3}; f_l gluing identities: {c4}"
    )


def criterion_5(resolution=80):
    _warm_up()
    t0 = time.perf_counter()
    desc = compute_hull(LIFTED, HullOptions(oracle_resolution=resolution))
    dt = time.perf_counter() - t0
    h = desc.diagnostics.oracle["spacing"]
    exact_ok = True
    for v, (lo, hi) in LIFTED_HEIGHTS.items():
        v = planar(*v)
        if desc.heights.bounds(v) != (lo, hi):
            exact_ok = False
    worst = desc.diagnostics.max_gap
    n = len(desc.vertices)
    ok = exact_ok and worst <= 2 * h and n == len(LIFTED_HEIGHTS) and dt < 60.0
    return ok, f"max |inner-outer| = {worst:.4f} = {worst / h:.2f} h over {n} vertices (h={h:.4f}), {dt:.1f}s at {resolution}^3"


def criterion_6():
    t4 = detect_t4(TARTAR)
    P = {i + 1: TriPoint(p.x, p.y, Fraction(0)) for i, p in enumerate(t4.square)}
    Kp = {i + 1: TriPoint(p.x, p.y, Fraction(0)) for i, p in enumerate(t4.points)}
    nu2 = dict((p, w) for w, p in t4_laminate(t4, 1).support)
    nu3 = dict((p, w) for w, p in t4_laminate(t4, 2).support)
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    ex = nu2 == {P[4]: half, Kp[4]: half} and nu3 == {P[3]: quarter, Kp[3]: quarter, Kp[4]: half}

    d2 = squared_distance(TARTAR_FLAT)
    desc = compute_hull(TARTAR_FLAT, HullOptions(check_outer=False))
    res = search_certificate(desc, P[1], 1e-4)
    lam = res.laminate
    value = pair(lam, d2)
    sound = res.success and barycenter(lam) == P[1] and value <= Fraction(1, 10**4)
    weights = [w for _, _, w, _ in res.trace[:10]]
    law = len(weights) == 10 and all(w == Fraction(1, 2**k) for k, w in enumerate(weights))
    residual = pairing_residuals(lam, TARTAR_FLAT)
    law = law and residual == [Fraction(1, 2**res.splits)]
    ok = ex and sound and law
    return ok, (
        f"nu2/nu3 exact: {ex}; certificate order {lam.order}, {res.splits} splits, "
        f"<nu, d_K^2> = {float(value):.3g}; weight halves for 10 rounds: {law}"
    )


def criterion_7(n_inputs=100, seed=7):
    rng = random.Random(seed)
    mismatches = 0
    for _ in range(n_inputs):
        n = rng.randint(5, 10)
        pts = [
            planar(Fraction(rng.randint(-12, 12), rng.choice([1, 2, 3])), Fraction(rng.randint(-12, 12), rng.choice([1, 2, 3])))
            for _ in range(n)
        ]
        if d_hull_2d(pts, AXIS_CONE).cells() != separate_hull(pts).cells():
            mismatches += 1
    cone = DirectionCone.from_pairs([("1", "0"), ("0", "1"), ("3", "2")])
    fig7 = d_hull_2d(PINWHEEL, cone)
    region = {v for f in fig7.faces for v in f}
    has = planar(1, Fraction(-1, 3)) in region and planar(-1, Fraction(1, 3)) in region
    golden = json.loads((GOLDEN / "cone_hull.json").read_text())
    matches = face_union_to_dict(fig7) == golden
    ok = mismatches == 0 and has and matches
    return ok, f"axis cone == separate hull on {n_inputs - mismatches}/{n_inputs} inputs; (1,-1/3),(-1,1/3) in region: {has}; golden: {matches}"


REFINE_BUDGET = 1000


def criterion_8(max_rounds=25, budget=REFINE_BUDGET):
    cone = equilateral_cone()
    rational = refine_grid(parallelogram_60(2), cone, max_rounds)
    side = snap(math.sqrt(2))
    t0 = time.perf_counter()
    irr = refine_grid(parallelogram_60(side), cone, max_rounds, max_vertices=budget)
    dt = time.perf_counter() - t0
    counts = irr.vertex_counts
    increasing = all(b > a for a, b in zip(counts, counts[1:]))
    reached = irr.rounds == max_rounds and not irr.terminated
    ok = rational.terminated and increasing and reached
    detail = (
        f"ratio 2 terminated in {rational.rounds} round(s); ratio sqrt2 (snapped) counts {list(counts)} "
        f"strictly increasing: {increasing}; rounds reached {irr.rounds}/{max_rounds} "
        f"(stopped by {budget}-vertex budget, {dt:.1f}s). Growth is evidence, not a non-termination proof."
    )
    if not reached:
        detail += " Counts roughly quadruple per round, so 25 rounds needs ~1e15 vertices."
    return ok, detail


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


# ---------------------------------------------------------------------------


def test_criterion_1_separate_hull_example():
    ok, detail = criterion_1()
    record(1, ok, detail)
    assert ok, detail


def test_criterion_2_five_point_quadrics():
    ok, detail = criterion_2()
    record(2, ok, detail)
    assert ok, detail


def test_criterion_3_t4_quadric_and_jensen():
    ok, detail = criterion_3()
    record(3, ok, detail)
    assert ok, detail


def test_criterion_4_gluing_identities():
    ok, detail = criterion_4()
    record(4, ok, detail)
    assert ok, detail


def test_criterion_5_inner_outer_agreement():
    ok, detail = criterion_5()
    record(5, ok, detail)
    assert ok, detail


def test_criterion_6_laminate_certificate():
    ok, detail = criterion_6()
    record(6, ok, detail)
    assert ok, detail


def test_criterion_7_directional_hulls():
    ok, detail = criterion_7()
    record(7, ok, detail)
    assert ok, detail


@pytest.mark.xfail(
    strict=True,
    reason="25 refinement rounds are out of reach: vertex counts grow about 4x per round (see notes)",
)
def test_criterion_8_refinement_experiment():
    ok, detail = criterion_8()
    record(8, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        record(k, *fn())
