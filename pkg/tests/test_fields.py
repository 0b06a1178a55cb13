import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rchull.fields import QSqrt3, parse_qsqrt3

frac = st.fractions(min_value=-20, max_value=20, max_denominator=30)
elems = st.builds(QSqrt3, frac, frac)


@given(elems, elems)
def test_arithmetic_matches_floats(a, b):
    assert float(a + b) == pytest.approx(float(a) + float(b), abs=1e-9)
    assert float(a - b) == pytest.approx(float(a) - float(b), abs=1e-9)
    assert float(a * b) == pytest.approx(float(a) * float(b), abs=1e-7)
    if b:
        assert float(a / b) == pytest.approx(float(a) / float(b), rel=1e-9, abs=1e-9)


@given(elems, elems)
def test_ordering_is_exact(a, b):
    fa, fb = float(a), float(b)
    if abs(fa - fb) > 1e-9:
        assert (a < b) == (fa < fb)
    assert (a == b) == ((a - b).sign() == 0)


@given(elems)
def test_roundtrip_text(a):
    assert parse_qsqrt3(str(a)) == a


def test_sqrt3_squared():
    r = QSqrt3(0, 1)
    assert r * r == QSqrt3(3)
    assert r.sign() == 1
    assert float(r) == pytest.approx(math.sqrt(3))
    assert QSqrt3(Fraction(7, 4), -1).sign() == 1  # 7/4 > sqrt3
    assert QSqrt3(Fraction(17, 10), -1).sign() == -1


def test_mixing_with_rationals():
    a = QSqrt3(1, 1)
    assert a + 1 == QSqrt3(2, 1)
    assert 1 - a == QSqrt3(0, -1)
    assert 2 / QSqrt3(2) == QSqrt3(1)
