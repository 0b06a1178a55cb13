"""Exact scalar fields: rationals (``fractions.Fraction``) and Q(sqrt 3)."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

_SQRT3 = math.sqrt(3.0)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(repr(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


def _sign_of(a: Fraction, b: Fraction) -> int:
    """Sign of a + b*sqrt(3), decided exactly."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with 3 b^2
    d = a * a - 3 * b * b
    if d == 0:
        return 0
    return sa if d > 0 else sb


class QSqrt3:
    """Element ``a + b*sqrt(3)`` of the quadratic field Q(sqrt 3).

    Arithmetic and ordering are exact. Mixed operations with ints and
    Fractions are supported; floats are rejected.
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _frac(a)
        self.b = _frac(b)

    @staticmethod
    def _coerce(other):
        if isinstance(other, QSqrt3):
            return other
        if isinstance(other, (int, Fraction)):
            return QSqrt3(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QSqrt3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QSqrt3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QSqrt3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.a * o.a - 3 * o.b * o.b
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        num = self * QSqrt3(o.a, -o.b)
        return QSqrt3(num.a / n, num.b / n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def sign(self) -> int:
        return _sign_of(self.a, self.b)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT3

    def __repr__(self):
        return f"QSqrt3({self.a!s}, {self.b!s})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt3"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*sqrt3"


SQRT3 = QSqrt3(0, 1)

_QS3_TERM = re.compile(r"^\s*([+-]?\s*[0-9./]*)\s*\*?\s*(sqrt3)?\s*$")


def parse_qsqrt3(text) -> QSqrt3:
    """Parse ``"a"``, ``"b*sqrt3"``, ``"sqrt3"``, ``"a+b*sqrt3"`` and the like."""
    if isinstance(text, QSqrt3):
        return text
    if not isinstance(text, str):
        return QSqrt3(_frac(text), 0)
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty Q(sqrt3) literal")
    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    a = Fraction(0)
    b = Fraction(0)
    for term in terms:
        m = _QS3_TERM.match(term)
        if m is None:
            raise ValueError(f"bad Q(sqrt3) literal: {text!r}")
        coef, root = m.group(1), m.group(2)
        if coef in ("", "+"):
            c = Fraction(1)
        elif coef == "-":
            c = Fraction(-1)
        else:
            c = Fraction(coef)
        if root:
            b += c
        else:
            if coef in ("", "+", "-"):
                raise ValueError(f"bad Q(sqrt3) literal: {text!r}")
            a += c
    return QSqrt3(a, b)
