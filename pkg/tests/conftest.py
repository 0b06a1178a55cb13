import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from rchull.geometry import planar, tri

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

PINWHEEL = [planar(3, 1), planar(1, -3), planar(-3, -1), planar(-1, 3), planar(2, 2)]
LIFTED = [tri(3, 1, 0), tri(1, -3, 0), tri(-3, -1, -1), tri(-1, 3, 0), tri(2, 2, 2)]
TARTAR = [planar(3, 1), planar(1, -3), planar(-3, -1), planar(-1, 3)]
TARTAR_FLAT = [tri(3, 1, 0), tri(1, -3, 0), tri(-3, -1, 0), tri(-1, 3, 0)]

# exact vertex heights of the five-point hull, (lower, upper)
LIFTED_HEIGHTS = {
    (-1, -1): (Fraction(-8, 15), Fraction(-14, 59)),
    (1, -1): (Fraction(-1, 15), Fraction(31, 59)),
    (-1, 1): (Fraction(-4, 15), Fraction(-7, 59)),
    (1, 1): (Fraction(-2, 15), Fraction(62, 59)),
    (-1, 2): (Fraction(-2, 15), Fraction(-7, 118)),
    (1, 2): (Fraction(58, 45), Fraction(155, 118)),
    (2, 1): (Fraction(-1, 15), Fraction(31, 59)),
    (2, 2): (Fraction(2), Fraction(2)),
    (3, 1): (Fraction(0), Fraction(0)),
    (1, -3): (Fraction(0), Fraction(0)),
    (-3, -1): (Fraction(-1), Fraction(-1)),
    (-1, 3): (Fraction(0), Fraction(0)),
}


@pytest.fixture(scope="session")
def lifted_flat_desc():
    """Five-point hull from the exact inner pass alone (no envelope cross-check)."""
    from rchull.triangular import HullOptions, compute_hull

    return compute_hull(LIFTED, HullOptions(check_outer=False))


@pytest.fixture(scope="session")
def tartar_desc():
    from rchull.triangular import HullOptions, compute_hull

    return compute_hull(TARTAR_FLAT, HullOptions(check_outer=False))


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.lines():
            terminalreporter.write_line(line)
